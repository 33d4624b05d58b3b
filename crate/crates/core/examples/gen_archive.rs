//! Writes a synthetic flow archive (series + metadata CSV) for trying the
//! command line without real data.
//!
//! ```bash
//! cargo run -p medcast-core --example gen_archive -- /tmp/archive 20 42
//! ```

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let dir = args.get(1).map(String::as_str).unwrap_or("/tmp/medcast-archive");
    let n_stations: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(20);
    let seed: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(42);

    let ds = medcast_core::sim::synthetic_flow_dataset(n_stations, 90, 0.7, seed);
    let (series, meta) = medcast_core::sim::dataset_to_csv(&ds);
    std::fs::create_dir_all(dir).expect("create output dir");
    let series_path = format!("{dir}/series.csv");
    let meta_path = format!("{dir}/meta.csv");
    std::fs::write(&series_path, series).expect("write series");
    std::fs::write(&meta_path, meta).expect("write metadata");
    println!("wrote {series_path} and {meta_path} ({n_stations} stations, seed {seed})");
}

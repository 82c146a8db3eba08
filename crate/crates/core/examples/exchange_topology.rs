//! Build PE graphs and the particle exchange maps derived from them, and
//! export both as CSV.
//!
//!     cargo run --example exchange_topology [OUT_DIR]

use std::fs::File;

use drna::topology::{
    build_exchange_map, default_degree, default_per_neighbor, havel_hakimi_regular, ExchangeMap,
    TopologyKind,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for m in [4, 8, 13, 32] {
        let d = default_degree(m);
        let g = havel_hakimi_regular(m, d)?;
        println!(
            "M = {m:>2}: {d}-regular, {} edges, connected = {}, neighbors of PE 0: {:?}",
            g.edges().len(),
            g.is_connected(),
            g.neighbors(0)
        );
    }

    let (m, k) = (8, 20);
    let map = build_exchange_map(TopologyKind::HavelHakimi, m, k, None)?;
    let p = default_per_neighbor(k, default_degree(m));
    println!("\nM = {m}, K = {k}: {p} particles per neighbor, {} leave each PE", map.outgoing(0));
    for slot in 0..k {
        let (u, v) = map.apply(0, slot);
        if u != 0 {
            println!("  (0, {slot:>2}) -> ({u}, {v:>2})");
        }
    }

    let ring = ExchangeMap::circular(3, 4)?;
    println!("\ncircular M = 3, K = 4: (0, 0) -> {:?}, (0, 3) -> {:?}", ring.apply(0, 0), ring.apply(0, 3));

    if let Some(dir) = std::env::args().nth(1) {
        std::fs::create_dir_all(&dir)?;
        havel_hakimi_regular(m, default_degree(m))?
            .write_edge_list(File::create(format!("{dir}/edges.csv"))?)?;
        map.write_csv(File::create(format!("{dir}/exchange_map.csv"))?)?;
        println!("\nwrote {dir}/edges.csv and {dir}/exchange_map.csv");
    }
    Ok(())
}

//! Run the brute-force GNS and Lindblad battery on random faithful states.
//!
//! ```text
//! cargo run --release --example verify_battery -- 3 100
//! ```

use std::time::Instant;

use hamlearn::verify::run_battery;

fn main() -> hamlearn::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(2);
    let instances: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(20);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(1);

    let start = Instant::now();
    let report = run_battery(n, seed, instances)?;
    println!("{report}");
    println!("elapsed {:.2?}", start.elapsed());
    if !report.all_passed() {
        std::process::exit(1);
    }
    Ok(())
}

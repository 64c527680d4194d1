//! Writes a synthetic CICIDS2017-shaped CSV to stdout.
//!
//! Usage: `cargo run -p hids-core --example synth_csv -- [scale] [seed] [spread] [informative] [noise]`

use std::io::Write;

use hids_core::synth::{generate, SynthSpec};

fn main() {
    let mut args = std::env::args().skip(1);
    let scale: usize = args.next().map_or(1, |s| s.parse().expect("scale must be an integer"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed must be an integer"));
    let mut spec = SynthSpec::small(seed);
    if let Some(s) = args.next() {
        spec.spread = s.parse().expect("spread must be a number");
    }
    if let Some(s) = args.next() {
        spec.informative = s.parse().expect("informative must be an integer");
    }
    if let Some(s) = args.next() {
        spec.noise = s.parse().expect("noise must be an integer");
    }
    for c in &mut spec.counts {
        *c *= scale;
    }
    std::io::stdout().write_all(&generate(&spec)).expect("stdout");
}

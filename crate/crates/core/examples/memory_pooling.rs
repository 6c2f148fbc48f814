//! Memory-effect refinement of a per-frame score series.
//!
//! A single bad frame keeps pulling the refined scores down for the rest of
//! the window, which a plain mean does not capture.

use favor::temporal::{memory_refine, pool, video_quality, MemoryParams, PoolStrategy};

fn main() -> favor::Result<()> {
    let mut raw = vec![0.95; 16];
    raw[5] = 0.40;
    raw[6] = 0.70;

    for params in [
        MemoryParams::default(),
        MemoryParams { window: 8, ..MemoryParams::default() },
        MemoryParams { gamma: 1.0, ..MemoryParams::default() },
    ] {
        let series = memory_refine(&raw, &params)?;
        println!("l={} gamma={}", params.window, params.gamma);
        for (k, (q, r)) in series.raw().iter().zip(series.refined()).enumerate() {
            println!("  {:2}  {q:.3} -> {r:.3}", k + 1);
        }
        println!("  memory score {:.4}", video_quality(&series)?);
    }
    println!("plain mean   {:.4}", pool(&raw, &PoolStrategy::Average)?);
    Ok(())
}

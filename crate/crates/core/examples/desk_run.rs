use falqon::experiment::ExperimentConfig;
use falqon::engine::FeedbackOrder;
use falqon::pipeline::run_full_pipeline;
use std::time::Instant;

fn main() {
    let mut cfg = ExperimentConfig::desk_default(7);
    cfg.sizes = vec![6, 8, 10, 12, 14];
    cfg.train_sizes = vec![6, 8, 10, 12, 14];
    cfg.order = FeedbackOrder::Second;
    let started = Instant::now();
    let dir = std::env::args().nth(1).unwrap_or_else(|| "/tmp/deskrun".into());
    let out = run_full_pipeline(&cfg, std::path::Path::new(&dir), None).unwrap();
    println!("elapsed: {:.1}s", started.elapsed().as_secs_f64());
    for s in &out.summary.sizes {
        println!("n={:2} mean_dt={:.4} std_dt={:.4} mean_ratio={:.4}", s.n, s.mean_best_dt, s.std_best_dt, s.mean_best_ratio);
    }
    println!("fit: coefficient={:.4} exponent={:.4} r2={:.4}", out.fit.coefficient, out.fit.exponent, out.fit.r_squared);
}

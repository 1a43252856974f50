use c2h_core::config::RunConfig;
use c2h_core::hybrid::Architecture;
use c2h_core::workflow::{prepare_data, run_classical_stage, run_hybrid_stage, stage_seed};

fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let cfg = RunConfig { seed, ..RunConfig::default() };
    let data = prepare_data(&cfg).unwrap();
    let t0 = std::time::Instant::now();
    let classical = run_classical_stage(&data, &cfg).unwrap();
    println!("classical: acc={:.4} ari={:.4} nmi={:.4} a_int={:.4} iters={} distinct={} [{:?}]",
        classical.evaluation.accuracy, classical.evaluation.ari, classical.evaluation.nmi,
        classical.evaluation.a_internal, classical.labels.iteration,
        classical.evaluation.contingency.learned_ids.len(), t0.elapsed());
    let t1 = std::time::Instant::now();
    let minimal = run_hybrid_stage(&data, &cfg, &Architecture::minimal(cfg.head_width_minimal),
        &cfg.train, "quantum-fast", stage_seed(seed, "minimal"), None).unwrap();
    let d = minimal.diagnostics.as_ref().unwrap();
    println!("minimal:   acc={:.4} ari={:.4} nmi={:.4} a_int={:.4} iters={} distinct={} | tsi={:.3} qgn={:.4} bpi={:.6} edqfs={:.4} qos={:.3} eee={:.4} qmi={:.4} [{:?}]",
        minimal.evaluation.accuracy, minimal.evaluation.ari, minimal.evaluation.nmi,
        minimal.evaluation.a_internal, minimal.labels.iteration,
        minimal.evaluation.contingency.learned_ids.len(),
        d.tsi, d.qgn, d.bpi, d.edqfs, d.qos, d.eee, d.qmi, t1.elapsed());
    let t2 = std::time::Instant::now();
    let refined = run_hybrid_stage(&data, &cfg, &Architecture::refined(cfg.refined_reps, cfg.head_width_refined),
        &cfg.train, "hybrid-plus", stage_seed(seed, "refined-1"), None).unwrap();
    let d = refined.diagnostics.as_ref().unwrap();
    println!("refined:   acc={:.4} ari={:.4} nmi={:.4} a_int={:.4} iters={} distinct={} | tsi={:.3} qgn={:.4} bpi={:.6} edqfs={:.4} qos={:.3} eee={:.4} qmi={:.4} [{:?}]",
        refined.evaluation.accuracy, refined.evaluation.ari, refined.evaluation.nmi,
        refined.evaluation.a_internal, refined.labels.iteration,
        refined.evaluation.contingency.learned_ids.len(),
        d.tsi, d.qgn, d.bpi, d.edqfs, d.qos, d.eee, d.qmi, t2.elapsed());
}

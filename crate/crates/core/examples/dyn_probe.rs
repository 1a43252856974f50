use c2h_core::config::RunConfig;
use c2h_core::evalmetrics::mapped_accuracy;
use c2h_core::hybrid::{Architecture, HybridPredictor, encoding_scale};
use c2h_core::pls::PlsPredictor;
use c2h_core::selftrain::{init_labels, step, SelfTrainOptions, Predictor};
use c2h_core::workflow::{prepare_data, stage_seed};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let seed: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let which = args.get(2).cloned().unwrap_or_else(|| "classical".into());
    let lr_c: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(0.01);
    let epochs: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(60);
    let width: usize = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(8);
    let lr_q: f64 = args.get(6).and_then(|s| s.parse().ok()).unwrap_or(0.05);
    let lr_a: f64 = args.get(7).and_then(|s| s.parse().ok()).unwrap_or(0.005);
    let folds: usize = args.get(8).and_then(|s| s.parse().ok()).unwrap_or(5);
    let mut cfg = RunConfig { seed, ..RunConfig::default() };
    cfg.cv_folds = folds;
    cfg.train.lr_adapter = lr_a;
    cfg.train.lr_classical = lr_c;
    cfg.train.lr_quantum = lr_q;
    cfg.train.epochs = epochs;
    cfg.train.patience = epochs.min(10).max(epochs/6);
    let data = prepare_data(&cfg).unwrap();
    let truth = &data.dataset.true_labels;
    let opts = SelfTrainOptions { batch_fraction: cfg.selftrain_batch_fraction };

    let (x, mut predictor): (_, Box<dyn Predictor>) = if which == "classical" {
        (data.classical_inputs.clone(), Box::new(PlsPredictor::new(cfg.pls_components, cfg.cv_folds, stage_seed(seed, "classical"))))
    } else {
        let x = data.hybrid_inputs.clone();
        let scale = encoding_scale(&x);
        let arch = if which == "minimal" { Architecture::minimal(width) } else { Architecture::refined(cfg.refined_reps, width) };
        let p = HybridPredictor::new(&arch, cfg.train, cfg.cv_folds, (0..x.rows()).collect(), scale, stage_seed(seed, "minimal"));
        (x, Box::new(p))
    };

    let t0 = std::time::Instant::now();
    let mut state = init_labels(x.rows()).unwrap();
    for _ in 0..cfg.selftrain_max_iterations {
        state = step(&state, predictor.as_mut(), &x, &opts).unwrap();
        let rec = state.history.last().unwrap();
        let mut ids = state.labels.clone(); ids.sort_unstable(); ids.dedup();
        let (acc, _) = mapped_accuracy(&state.labels, truth).unwrap();
        // Weighted purity: majority true class per cluster.
        let purity: f64 = ids.iter().map(|&id| {
            let mut counts = [0usize; 3];
            for i in 0..state.labels.len() {
                if state.labels[i] == id { counts[truth[i]] += 1; }
            }
            *counts.iter().max().unwrap() as f64
        }).sum::<f64>() / state.labels.len() as f64;
        println!("iter {:2}: changed={:2} agreement={:.3} distinct={:3} mapped_acc={:.3} purity={:.3}",
                 rec.iteration, rec.changed.len(), rec.agreement, ids.len(), acc, purity);
        if rec.changed.is_empty() { break; }
    }
    println!("elapsed {:?}", t0.elapsed());
}

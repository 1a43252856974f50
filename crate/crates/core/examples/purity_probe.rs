use c2h_core::config::RunConfig;
use c2h_core::hybrid::{Architecture, HybridPredictor, encoding_scale};
use c2h_core::pls::PlsPredictor;
use c2h_core::selftrain::Predictor;
use c2h_core::workflow::{prepare_data, stage_seed};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let seed: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let which = args.get(2).cloned().unwrap_or_else(|| "minimal".into());
    let lr_c: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(0.01);
    let epochs: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(60);
    let width: usize = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(8);
    let lr_q: f64 = args.get(6).and_then(|s| s.parse().ok()).unwrap_or(0.05);
    let mut cfg = RunConfig { seed, ..RunConfig::default() };
    cfg.train.lr_classical = lr_c;
    cfg.train.epochs = epochs;
    cfg.train.lr_quantum = lr_q;
    cfg.train.patience = 10.max(epochs / 6);
    let data = prepare_data(&cfg).unwrap();
    let truth = &data.dataset.true_labels;
    let n = data.dataset.n_samples();
    let labels: Vec<usize> = (0..n).collect();

    let (x, mut predictor): (_, Box<dyn Predictor>) = if which == "classical" {
        (data.classical_inputs.clone(), Box::new(PlsPredictor::new(cfg.pls_components, cfg.cv_folds, stage_seed(seed, "classical"))))
    } else {
        let x = data.hybrid_inputs.clone();
        let scale = encoding_scale(&x);
        let arch = if which == "minimal" { Architecture::minimal(width) } else { Architecture::refined(cfg.refined_reps, width) };
        let p = HybridPredictor::new(&arch, cfg.train, cfg.cv_folds, labels.clone(), scale, stage_seed(seed, "minimal"));
        (x, Box::new(p))
    };

    predictor.fit(&x, &labels).unwrap();
    let cv = predictor.cross_val_predict(&x, &labels).unwrap();
    // Purity: does the predicted id's true class match the sample's true class?
    let pure = (0..n).filter(|&i| truth[cv.labels[i]] == truth[i]).count();
    // Purity among the top-15 confidence mismatched (the actual batch).
    let mut mismatched: Vec<usize> = (0..n).filter(|&i| cv.labels[i] != labels[i]).collect();
    mismatched.sort_by(|&a, &b| cv.confidence[b].partial_cmp(&cv.confidence[a]).unwrap().then(a.cmp(&b)));
    let batch: Vec<usize> = mismatched.iter().take(15).copied().collect();
    let batch_pure = batch.iter().filter(|&&i| truth[cv.labels[i]] == truth[i]).count();
    println!("{which}: cv purity {}/{} = {:.3} | batch purity {}/{}", pure, n, pure as f64 / n as f64, batch_pure, batch.len());
}

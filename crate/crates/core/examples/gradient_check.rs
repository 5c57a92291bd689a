//! Compares the tape's reverse-mode gradients with central finite
//! differences on a tiny GRU critic and reports the worst relative error.
//!
//! cargo run --example gradient_check

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uavlora::neural::{CriticNet, CriticSpec, Tape};

fn loss(net: &CriticNet, values: &[f64], states: &[f64], hidden: &[f64], targets: &[f64], grads: Option<&mut [f64]>) -> f64 {
    let rows = targets.len();
    let mut t = Tape::new(values);
    let fwd = net.record_rows(&mut t, states, hidden, rows).expect("shapes match");
    let tgt = t.constant_rows(targets.to_vec(), rows);
    let d = t.sub(fwd.value, tgt);
    let sq = t.square(d);
    let s = t.sum(sq);
    let l = t.scale(s, 0.5 / rows as f64);
    if let Some(g) = grads {
        t.backward(l, g);
    }
    t.scalar(l)
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let spec = CriticSpec { input_dim: 5, hidden: 4 };
    let net = CriticNet::init(spec, &mut rng);
    let states: Vec<f64> = (0..15).map(|i| ((i * 37 % 11) as f64 - 5.0) / 5.0).collect();
    let hidden = vec![0.1; 12];
    let targets = [0.5, -1.0, 2.0];

    let mut analytic = vec![0.0; net.params.len()];
    let base = loss(&net, &net.params.values, &states, &hidden, &targets, Some(&mut analytic));
    let h = 1e-5;
    let mut probe = net.params.values.clone();
    let mut worst = (0.0f64, 0);
    for i in 0..probe.len() {
        let x = probe[i];
        probe[i] = x + h;
        let up = loss(&net, &probe, &states, &hidden, &targets, None);
        probe[i] = x - h;
        let down = loss(&net, &probe, &states, &hidden, &targets, None);
        probe[i] = x;
        let numeric = (up - down) / (2.0 * h);
        let rel = (analytic[i] - numeric).abs() / analytic[i].abs().max(numeric.abs()).max(1e-6);
        if rel > worst.0 {
            worst = (rel, i);
        }
    }
    println!("loss {base:.6}, {} parameters", probe.len());
    for s in &net.params.layout {
        println!("  {:<12} {}x{}", s.name, s.rows, s.cols);
    }
    println!("worst relative error {:.2e} at parameter {}", worst.0, worst.1);
}

//! Runs the linear-chain CRF primitives on a hand-written score table.

use rhetorical_roles::crf::{log_partition, marginals, nll_and_grad, viterbi, CrfParams, EmissionMatrix};
use rhetorical_roles::Result;

fn main() -> Result<()> {
    // three sentences, three labels
    let em = EmissionMatrix::from_rows(&[vec![2.0, 0.5, 0.0], vec![0.3, 1.0, 0.9], vec![0.0, 0.2, 1.5]])?;
    let params = CrfParams {
        num_labels: 3,
        transitions: vec![0.5, -0.2, -1.0, -0.5, 0.4, 0.1, -2.0, 0.0, 0.6],
        start: vec![0.2, 0.0, -0.5],
        stop: vec![-0.3, 0.0, 0.4],
    };

    let (path, score) = viterbi(&em, &params)?;
    let log_z = log_partition(&em, &params)?;
    println!("best path {path:?}, score {score:.4}, log Z {log_z:.4}");
    println!("probability of the best path {:.4}", (score - log_z).exp());

    let m = marginals(&em, &params)?;
    for t in 0..3 {
        let row: Vec<String> = (0..3).map(|k| format!("{:.3}", m.get(t, k))).collect();
        println!("position {t} marginals {}", row.join(" "));
    }

    let (nll, grad) = nll_and_grad(&em, &params, &[0, 1, 2])?;
    println!("nll of [0, 1, 2] = {nll:.4}; d/d start = {:?}", grad.params.start);
    Ok(())
}

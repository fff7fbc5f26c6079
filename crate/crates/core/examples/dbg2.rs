// E2 near its vanishing rate (temporary).
include!("oracle_inc.rs");
use slotcode::exponents::{exponent_e2, rate_vs_distortion, ExponentProblem};
use slotcode::probability::Distribution;
use slotcode::channel::Dmc;

fn main() {
    let rows_v = [vec![0.95, 0.05], vec![0.8, 0.2], vec![0.2, 0.8]];
    let rows = [[0.95, 0.05], [0.8, 0.2], [0.2, 0.8]];
    let ch = Dmc::new(&rows_v, 0).unwrap();
    let p = Distribution::new(vec![0.5, 0.5]).unwrap();
    let probe = ExponentProblem::new(&ch, p.clone(), 0.0, 0.0, 1.2).unwrap();
    let qy = Distribution::new(vec![0.5, 0.5]).unwrap();
    let target = rate_vs_distortion(-1.2, &qy, &probe);
    println!("target R* = {target:.6}");
    for ds in [0.0, 5e-4, 1e-3, 2e-3, 3e-3, 4e-3, 6e-3] {
        let r = target - ds;
        let prob = ExponentProblem::new(&ch, p.clone(), r, 0.0, 1.2).unwrap();
        let eng = exponent_e2(&prob).value;
        let orc = Problem2x2::new(&rows, [0.5, 0.5], r, 0.0, 1.2);
        let cond = conditionals(&orc, 200);
        println!("R = R* - {ds:.4}: engine E2 = {eng:.3e}, oracle E2 = {:.3e}", cond.e_2);
    }
}

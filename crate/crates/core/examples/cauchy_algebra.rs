//! Residuals of the Cauchy-action identities over random matrices, regular and singular.

use nitns::experiment::cauchy_algebra_residuals;
use nitns::tensor::{cauchy_action, det3};

fn main() {
    for singular in [false, true] {
        let [cyc, idd, nid] = cauchy_algebra_residuals(10_000, 7, singular);
        println!("singular={singular:5}: composition {cyc:.2e}, identity {idd:.2e}, near-identity {nid:.2e}");
    }
    let m = [[2.0, 1.0, 0.0], [0.0, 1.0, 3.0], [1.0, 0.0, 1.0]];
    let q = [1.0, -1.0, 0.5];
    println!("C(q, M) = {:?}, det M = {}", cauchy_action(q, &m), det3(&m));
}

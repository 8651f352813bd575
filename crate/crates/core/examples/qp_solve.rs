//! A small filter-shaped QP: project a desired control onto two half-spaces
//! inside a box, with a slack on one of them.

use inspect_rta::qp::QuadraticProgram;

fn main() {
    // z = [u0, u1, s]; the slack is expensive
    let mut qp = QuadraticProgram::least_squares(&[1.0, 1.0, 1e6], &[0.8, 0.9, 0.0]);
    qp.lb = vec![-1.0, -1.0];
    qp.ub = vec![1.0, 1.0];
    // u0 + u1 <= 1, hard
    qp.add_row(vec![-1.0, -1.0, 0.0], -1.0);
    // u0 <= 0.2 unless the slack pays for it
    qp.add_row(vec![-1.0, 0.0, 1.0], -0.2);

    let sol = qp.solve();
    println!("status      {:?} after {} iterations", sol.status, sol.iterations);
    println!("z           {:.6?}", sol.z);
    println!("multipliers {:.6?}", sol.multipliers);
    println!("objective   {:.9}", qp.objective(&sol.z));
    println!("kkt         {:.2e}", sol.kkt_residual);

    qp.add_row(vec![1.0, 1.0, 0.0], 1.5);
    let sol = qp.solve();
    println!("with u0 + u1 >= 1.5 added: {:?}", sol.status);
}

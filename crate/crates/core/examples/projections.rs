//! Constraint-set projections and the ℓ1 tangent cone.

use ndarray::array;
use shrinkage::geometry::{project_l1_ball, project_l2_ball, project_sparse, prox_l1, L1TangentCone, Regularizer};

fn main() {
    let v = array![3.0, -1.0, 0.5, 0.2, -2.0];
    println!("v                 = {v}");
    println!("P_l1(v), R = 2    = {}", project_l1_ball(v.view(), 2.0));
    println!("P_l2(v), R = 1    = {}", project_l2_ball(v.view(), 1.0));
    println!("top-2             = {}", project_sparse(v.view(), 2));
    println!("soft(v, 0.6)      = {}", prox_l1(v.view(), 0.6));

    let reg = Regularizer::L1Ball { radius: 2.0 };
    let z = reg.project(v.view());
    println!("feasible: {}, R(P(v)) = {:.12}", reg.is_feasible(z.view(), 1e-12), reg.value(z.view()));

    // Tangent cone of the ℓ1 norm at a 2-sparse point.
    let theta = array![0.6, 0.0, -0.8, 0.0, 0.0];
    let cone = L1TangentCone::at(theta.view());
    let g = array![0.3, 1.2, 0.4, -0.7, 0.1];
    let pc = cone.project(g.view());
    let polar = cone.project_polar(g.view());
    println!("\nsupport {:?}", cone.support());
    println!("P_C(g)  = {pc}");
    println!("P_C°(g) = {polar}, scale {:.4}", cone.polar_scale(g.view()));
    println!("Moreau residual {:.2e}, <P_C g, P_C° g> = {:.2e}", (&pc + &polar - &g).mapv(f64::abs).sum(), pc.dot(&polar));
    println!("P_C(g) in cone: {}", cone.contains(pc.view(), 1e-12));
}

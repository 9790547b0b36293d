#![allow(dead_code)]

use arclp::arc::{self, ArcDerivatives};
use arclp::kkt::{KktOptions, KktSolver};
use arclp::{Iterate, StandardLp};
use rand::Rng;
use testkit::DenseLp;

pub struct Fixture {
    pub dense: DenseLp,
    pub lp: StandardLp,
    pub it: Iterate,
}

impl Fixture {
    pub fn derivatives(&self) -> ArcDerivatives {
        let mut kkt = KktSolver::new(&self.lp.a, KktOptions::default());
        let f = kkt.factor(&arc::scaling_weights(&self.it)).unwrap();
        arc::arc_derivatives(&self.lp, &self.it, &kkt, &f).unwrap()
    }
}

/// Random instance from `seed` with a random infeasible interior point.
pub fn fixture(seed: u64) -> Fixture {
    let dense = testkit::random_instance(seed);
    let lp = StandardLp::from_dense(&dense.a, &dense.b, &dense.c).unwrap();
    let mut r = testkit::rng(seed ^ 0x9e37_79b9);
    let (x, lambda, s) = testkit::random_point(&mut r, dense.nrows(), dense.ncols());
    let nu = r.gen_range(0.1..1.0);
    let it = Iterate::new(&lp, x, lambda, s, nu).unwrap();
    Fixture { dense, lp, it }
}

pub fn scaled(err: f64, scale: f64) -> f64 {
    err / scale.max(1.0)
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shapemap_core::geometry::{BasePoint, Congruence, Direction, JetPoint, PdeSystem};
use shapemap_core::VariableLayout;

pub struct Case {
    pub name: &'static str,
    pub sys: PdeSystem,
    pub z: Congruence,
    pub dir: Direction,
    /// Sampling box for base points, `(lo, hi)` per coordinate.
    pub bounds: Vec<(f64, f64)>,
}

pub fn lemniscate_layout() -> VariableLayout {
    VariableLayout::new(["t", "theta"], ["r"]).unwrap()
}

pub fn lemniscate() -> (PdeSystem, Congruence) {
    let l = lemniscate_layout();
    let sys = PdeSystem::parse(
        &l,
        &[("r", "t", "t", "-r"), ("r", "t", "theta", "r_t*r_theta/r"), ("r", "theta", "theta", "-2*r - r_theta^2/r")],
    )
    .unwrap();
    let z = Congruence::parse(&l, &[("r", "t", "r*cot(t)"), ("r", "theta", "-r*tan(2*theta)")]).unwrap();
    (sys, z)
}

pub fn exp2() -> (PdeSystem, Congruence) {
    let l = VariableLayout::new(["x1", "x2"], ["y"]).unwrap();
    let sys = PdeSystem::parse(&l, &[("y", "x1", "x1", "y"), ("y", "x1", "x2", "2*y"), ("y", "x2", "x2", "4*y")]).unwrap();
    let z = Congruence::parse(&l, &[("y", "x1", "y"), ("y", "x2", "2*y")]).unwrap();
    (sys, z)
}

/// Two coupled components with `Z_i = M_i y` for commuting `M_1 = I + 2N`,
/// `M_2 = N`, `N² = 0`, and `F_ij = M_j M_i y` plus terms that vanish on the
/// image of `Z` but depend on the jet variables.
pub fn coupled() -> (PdeSystem, Congruence, Direction) {
    let l = VariableLayout::new(["x1", "x2"], ["u", "w"]).unwrap();
    let sys = PdeSystem::parse(
        &l,
        &[
            ("u", "x1", "x1", "u + 4*w + 0.3*(u_x2 - w)"),
            ("w", "x1", "x1", "w"),
            ("u", "x1", "x2", "w"),
            ("w", "x1", "x2", "sin(w_x1 - w)*u"),
            ("u", "x2", "x2", "(u_x1 - u - 2*w)*w_x2 + 0.5*w_x2^2"),
            ("w", "x2", "x2", "exp(x1)*w_x2*u_x1"),
        ],
    )
    .unwrap();
    let z = Congruence::parse(&l, &[("u", "x1", "u + 2*w"), ("w", "x1", "w"), ("u", "x2", "w"), ("w", "x2", "0")]).unwrap();
    let dir = Direction::parse(&l, "x1", &["1", "0.5 + 0.1*x1 + 0.2*sin(x2)"]).unwrap();
    (sys, z, dir)
}

pub fn cases() -> Vec<Case> {
    let (sys, z) = lemniscate();
    let lem_bounds = vec![(0.3, 2.8), (-0.6, 0.6), (0.5, 2.0)];
    let mut out = vec![
        Case {
            name: "lemniscate-t",
            dir: Direction::coordinate(sys.layout(), 0).unwrap(),
            sys: sys.clone(),
            z: z.clone(),
            bounds: lem_bounds.clone(),
        },
        Case { name: "lemniscate-theta", dir: Direction::coordinate(sys.layout(), 1).unwrap(), sys, z, bounds: lem_bounds },
    ];
    let (sys, z) = exp2();
    out.push(Case {
        name: "exp2",
        dir: Direction::parse(sys.layout(), "x1", &["1", "0.5"]).unwrap(),
        sys,
        z,
        bounds: vec![(-1.0, 1.0), (-1.0, 1.0), (0.2, 3.0)],
    });
    let (sys, z, dir) = coupled();
    out.push(Case { name: "coupled", sys, z, dir, bounds: vec![(-1.0, 1.0), (-1.0, 1.0), (-1.5, 1.5), (-1.5, 1.5)] });
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn base_point(rng: &mut ChaCha8Rng, case: &Case) -> BasePoint {
    let v: Vec<f64> = case.bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect();
    BasePoint::from_slice(case.sys.n(), &v)
}

/// The lift of a random base point, with every jet coordinate moved off the
/// image of `Z` by up to `spread`.
pub fn jet_point(rng: &mut ChaCha8Rng, case: &Case, spread: f64) -> JetPoint {
    let b = base_point(rng, case);
    let mut p = case.z.jet_lift(&b).unwrap();
    for row in &mut p.yx {
        for v in row {
            *v += rng.gen_range(-spread..spread);
        }
    }
    p
}

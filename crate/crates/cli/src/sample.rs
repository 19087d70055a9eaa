//! Seeded random sequents.

use nmodal::formula::{closure_of, Formula};
use nmodal::nmatrix::DEFAULT_MAX_CLOSURE;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const VARS: [&str; 3] = ["p", "q", "r"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sequent {
    pub premises: Vec<Formula>,
    pub conclusion: Formula,
}

impl Sequent {
    pub fn render(&self) -> String {
        let premises: Vec<String> = self.premises.iter().map(Formula::print).collect();
        format!("{} |= {}", premises.join(", "), self.conclusion.print())
    }
}

/// A formula over `p`, `q`, `r` of depth at most `depth`.
pub fn random_formula(rng: &mut impl Rng, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return Formula::var(VARS[rng.gen_range(0..VARS.len())]);
    }
    match rng.gen_range(0..3) {
        0 => Formula::neg(random_formula(rng, depth - 1)),
        1 => Formula::boxed(random_formula(rng, depth - 1)),
        _ => Formula::implies(
            random_formula(rng, depth - 1),
            random_formula(rng, depth - 1),
        ),
    }
}

/// `n` sequents with up to two premises, each formula of depth at most 3.
/// Draws whose closure exceeds the default search cap are redrawn, so every
/// sequent can be decided.
pub fn random_sequents(seed: u64, n: usize) -> Vec<Sequent> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let k = rng.gen_range(0..=2);
        let premises: Vec<Formula> = (0..k).map(|_| random_formula(&mut rng, 3)).collect();
        let conclusion = random_formula(&mut rng, 3);
        if closure_of(premises.iter().chain([&conclusion])).len() <= DEFAULT_MAX_CLOSURE {
            out.push(Sequent {
                premises,
                conclusion,
            });
        }
    }
    out
}

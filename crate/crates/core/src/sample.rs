//! Deterministic random corpora for property checks and falsification:
//! seeded polynomial Lagrangians, expressions, and problem files.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::jetcore::{Expr, JetSpace, Monomial, Rational};
use crate::parser::{BodyEntry, BodyKey, FileKind, ProblemFile};
use crate::varcalc::Lagrangian;

/// Bounds for random expression generation.
#[derive(Clone, Copy, Debug)]
pub struct ExprProfile {
    pub max_degree: u32,
    pub max_terms: usize,
}

impl Default for ExprProfile {
    fn default() -> Self {
        ExprProfile {
            max_degree: 3,
            max_terms: 6,
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small nonzero rational with numerator in ±1..=9 and denominator 1..=4.
pub fn random_coefficient(rng: &mut ChaCha8Rng) -> Rational {
    let numer = loop {
        let n = rng.gen_range(-9i64..=9);
        if n != 0 {
            break n;
        }
    };
    Rational::new(numer.into(), rng.gen_range(1i64..=4).into())
}

/// Random polynomial over `space` respecting the profile bounds. May come
/// out with fewer terms (duplicates merge) and is occasionally zero.
pub fn random_expr(rng: &mut ChaCha8Rng, space: &JetSpace, profile: ExprProfile) -> Expr {
    let vars = space.jet_variables();
    let num_terms = rng.gen_range(1..=profile.max_terms);
    let mut terms = Vec::with_capacity(num_terms);
    for _ in 0..num_terms {
        let degree = rng.gen_range(0..=profile.max_degree);
        let mut powers = Vec::with_capacity(degree as usize);
        for _ in 0..degree {
            powers.push((vars[rng.gen_range(0..vars.len())].clone(), 1));
        }
        terms.push((Monomial::from_powers(powers), random_coefficient(rng)));
    }
    Expr::from_terms(space, terms)
}

/// Random jet space with up to `max_n` independent and `max_l` dependent
/// variables and derivative order up to `max_k`.
pub fn random_space(rng: &mut ChaCha8Rng, max_n: usize, max_l: usize, max_k: usize) -> JetSpace {
    const INDEP: [&str; 3] = ["t", "x", "y"];
    const DEP: [&str; 3] = ["u", "v", "w"];
    let n = rng.gen_range(1..=max_n.min(INDEP.len()));
    let l = rng.gen_range(1..=max_l.min(DEP.len()));
    let k = rng.gen_range(0..=max_k);
    JetSpace::new(&INDEP[..n], &DEP[..l], k).expect("pool names are valid")
}

/// Seeded corpus of polynomial Lagrangians (n ≤ 2, l ≤ 2, k ≤ 2 by default).
pub fn lagrangian_corpus(seed: u64, count: usize) -> Vec<Lagrangian> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            let space = random_space(&mut rng, 2, 2, 2);
            Lagrangian::new(random_expr(&mut rng, &space, ExprProfile::default()))
        })
        .collect()
}

/// Random problem file of any kind, for parse/render round-trip checks.
pub fn random_problem_file(rng: &mut ChaCha8Rng) -> ProblemFile {
    const NAMES: [&str; 4] = ["alpha", "beta", "gamma", "delta"];
    let name = NAMES[rng.gen_range(0..NAMES.len())].to_string();
    match rng.gen_range(0..4u8) {
        0 => {
            let space = random_space(rng, 3, 3, 2);
            let entries = (0..space.num_dep())
                .map(|_| BodyEntry {
                    key: BodyKey::Eq,
                    expr: random_expr(rng, &space, ExprProfile::default()),
                })
                .collect();
            normalize_order(ProblemFile {
                kind: FileKind::System,
                name,
                space,
                entries,
            })
        }
        1 => {
            let space = random_space(rng, 3, 3, 2);
            let entries = vec![BodyEntry {
                key: BodyKey::Density,
                expr: random_expr(rng, &space, ExprProfile::default()),
            }];
            normalize_order(ProblemFile {
                kind: FileKind::Lagrangian,
                name,
                space,
                entries,
            })
        }
        2 => {
            let space = random_phase_space(rng);
            let entries = (0..space.num_dep())
                .map(|j| BodyEntry {
                    key: BodyKey::Coord(j as u8),
                    expr: random_expr(rng, &space, ExprProfile::default()),
                })
                .collect();
            ProblemFile {
                kind: FileKind::MechField,
                name,
                space,
                entries,
            }
        }
        _ => {
            let space = random_phase_space(rng);
            let d = space.num_dep() as u8;
            let mut entries = Vec::new();
            for j in 0..d {
                for k in j + 1..d {
                    if rng.gen_bool(0.6) {
                        entries.push(BodyEntry {
                            key: BodyKey::Pair(j, k),
                            expr: random_expr(rng, &space, ExprProfile::default()),
                        });
                    }
                }
            }
            if entries.is_empty() {
                entries.push(BodyEntry {
                    key: BodyKey::Pair(0, 1),
                    expr: random_expr(rng, &space, ExprProfile::default()),
                });
            }
            ProblemFile {
                kind: FileKind::MechForm,
                name,
                space,
                entries,
            }
        }
    }
}

fn random_phase_space(rng: &mut ChaCha8Rng) -> JetSpace {
    const COORDS: [&str; 4] = ["q", "p", "r", "s"];
    let d = rng.gen_range(2..=COORDS.len());
    JetSpace::new::<&str>(&[], &COORDS[..d], 0).expect("pool names are valid")
}

/// The parser infers the space order from the body; regenerated files must
/// carry the same inferred order to round-trip by equality.
fn normalize_order(mut p: ProblemFile) -> ProblemFile {
    let order = p
        .entries
        .iter()
        .map(|e| e.expr.max_jet_order())
        .max()
        .unwrap_or(0);
    p.space = p.space.with_order(order);
    p.entries = p
        .entries
        .into_iter()
        .map(|e| BodyEntry {
            expr: e.expr.with_order(order),
            key: e.key,
        })
        .collect();
    p
}

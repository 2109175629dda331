//! Seeded generators for models, strategies and formulas used by the
//! randomized tests.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::formula::Formula;
use crate::func::Func;
use crate::strategy::{Guard, Kind, LetterCache, NatStrategy};
use crate::value::Value;
use crate::wcgs::{AgentId, Wcgs, WcgsBuilder};
use crate::we::WeFormula;

pub const PROPS: [&str; 2] = ["p", "r"];

const WEIGHTS: [(i128, i128); 5] = [(-1, 1), (-1, 2), (0, 1), (1, 2), (1, 1)];

pub fn random_weight<R: Rng>(rng: &mut R) -> Value {
    let (n, d) = WEIGHTS[rng.gen_range(0..WEIGHTS.len())];
    Value::new(n, d)
}

/// Random partition of `0..n` into classes.
fn partition<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<usize>> {
    let k = rng.gen_range(1..=n);
    let mut classes = vec![Vec::new(); k];
    for q in 0..n {
        classes[rng.gen_range(0..k)].push(q);
    }
    classes.retain(|c| !c.is_empty());
    classes
}

/// Model with 1..=`max_states` states, `agents` agents, 1..=`max_actions`
/// actions all legal everywhere, propositions [`PROPS`] and random
/// observation classes.
pub fn random_model<R: Rng>(rng: &mut R, max_states: usize, agents: usize, max_actions: usize) -> Wcgs {
    let ns = rng.gen_range(1..=max_states);
    let na = rng.gen_range(1..=max_actions);
    let agent_names: Vec<String> = (1..=agents).map(|i| i.to_string()).collect();
    let actions: Vec<String> = (0..na).map(|i| format!("c{i}")).collect();
    let states: Vec<String> = (0..ns).map(|i| format!("s{i}")).collect();
    let props: Vec<String> = PROPS.iter().map(|p| p.to_string()).collect();
    let mut b = WcgsBuilder::new(agent_names, actions, states, props).expect("valid names");
    let all: Vec<usize> = (0..na).collect();
    for a in 0..agents {
        for q in 0..ns {
            b.set_legal(a, q, all.clone());
        }
    }
    for q in 0..ns {
        let mut profile = vec![0; agents];
        loop {
            b.set_trans(q, &profile, rng.gen_range(0..ns)).expect("legal profile");
            let mut i = 0;
            while i < agents {
                profile[i] += 1;
                if profile[i] < na {
                    break;
                }
                profile[i] = 0;
                i += 1;
            }
            if i == agents {
                break;
            }
        }
        for p in 0..PROPS.len() {
            b.set_weight(q, p, random_weight(rng)).expect("weight in range");
        }
    }
    let mut init = vec![0];
    if ns > 1 && rng.gen_bool(0.3) {
        init.push(rng.gen_range(1..ns));
    }
    b.set_initial(init);
    for a in 0..agents {
        b.set_obs(a, partition(rng, ns));
    }
    b.build().expect("random model is well formed")
}

/// Inner (knowledge-free) WE formula over [`PROPS`].
pub fn random_we_inner<R: Rng>(rng: &mut R, depth: usize) -> WeFormula {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..4) {
            0 => WeFormula::konst(random_weight(rng)),
            _ => WeFormula::atom(*PROPS.choose(rng).unwrap()),
        };
    }
    let f = [Func::Neg, Func::Or, Func::And, Func::Min, Func::Max][rng.gen_range(0..5)];
    let args = match f {
        Func::Neg => vec![random_we_inner(rng, depth - 1)],
        _ => vec![random_we_inner(rng, depth - 1), random_we_inner(rng, depth - 1)],
    };
    WeFormula::fun(f, args)
}

/// `K[a](inner)`.
pub fn random_letter<R: Rng>(rng: &mut R, m: &Wcgs, agent: AgentId) -> WeFormula {
    WeFormula::know(m.agent_name(agent), random_we_inner(rng, 2))
}

/// Memoryless strategy with up to two guarded pairs before `(⊤, c)`.
pub fn random_memoryless<R: Rng>(rng: &mut R, m: &Wcgs, agent: AgentId, cache: &LetterCache) -> NatStrategy {
    let na = m.actions().len();
    let mut pairs = Vec::new();
    for _ in 0..rng.gen_range(0..=2) {
        pairs.push((Guard::State(random_letter(rng, m, agent)), rng.gen_range(0..na)));
    }
    pairs.push((Guard::top(), rng.gen_range(0..na)));
    let name = format!("r{}_{}", m.agent_name(agent), rng.gen::<u32>());
    NatStrategy::new(m, name, agent, Kind::Memoryless, pairs, cache).expect("all actions legal")
}

/// Temporal-free formula over [`PROPS`] with values in `[-1, 1]`.
pub fn random_state_formula<R: Rng>(rng: &mut R, depth: usize) -> Formula {
    random_state_formula_over(rng, depth, &PROPS)
}

pub fn random_state_formula_over<R: Rng>(rng: &mut R, depth: usize, props: &[&str]) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..4) {
            0 => Formula::konst(random_weight(rng)),
            _ => Formula::atom(*props.choose(rng).unwrap()),
        };
    }
    let f = [Func::Neg, Func::Or, Func::And, Func::Min, Func::Max][rng.gen_range(0..5)];
    let args = match f {
        Func::Neg => vec![random_state_formula_over(rng, depth - 1, props)],
        _ => vec![
            random_state_formula_over(rng, depth - 1, props),
            random_state_formula_over(rng, depth - 1, props),
        ],
    };
    Formula::fun(f, args)
}

/// Path formula under a full binding: one temporal operator around state
/// formulas, possibly nested once.
pub fn random_path_formula<R: Rng>(rng: &mut R, props: &[&str]) -> Formula {
    let s = |rng: &mut R| random_state_formula_over(rng, 1, props);
    let f = match rng.gen_range(0..5) {
        0 => Formula::next(s(rng)),
        1 => Formula::eventually(s(rng)),
        2 => Formula::always(s(rng)),
        3 => Formula::until(s(rng), s(rng)),
        _ => Formula::eventually(Formula::always(s(rng))),
    };
    if rng.gen_bool(0.3) {
        Formula::fun(Func::Neg, vec![f])
    } else {
        f
    }
}

/// Sentence `Q1 x1:a1<=k1 . Q2 x2:a2<=k2 . bind(a1,x1) bind(a2,x2) path`
/// over two agents, with quantifier order, polarity and bounds at random.
pub fn random_sentence<R: Rng>(rng: &mut R, agents: &[String], max_k: usize, props: &[&str]) -> Formula {
    let mut order: Vec<&String> = agents.iter().collect();
    order.shuffle(rng);
    let mut body = random_path_formula(rng, props);
    for a in agents.iter().rev() {
        body = Formula::bind_var(a.as_str(), format!("x{a}"), body);
    }
    for a in order.into_iter().rev() {
        let k = rng.gen_range(1..=max_k);
        body = if rng.gen_bool(0.5) {
            Formula::exists(format!("x{a}"), a.as_str(), k, body)
        } else {
            Formula::forall(format!("x{a}"), a.as_str(), k, body)
        };
    }
    body
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_objects_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cache = LetterCache::new();
        for _ in 0..50 {
            let m = random_model(&mut rng, 6, 2, 3);
            assert!(m.num_states() <= 6);
            let s = random_memoryless(&mut rng, &m, 1, &cache);
            assert!(s.is_stateless());
            let phi = random_sentence(&mut rng, m.agents(), 2, &PROPS);
            assert!(phi.is_sentence(m.agents()), "{phi}");
        }
    }
}

//! BB84 signals on two qubits measured in the Bell basis, checked against a
//! brute-force oracle that uses only plain arrays: explicit 4×4 products,
//! index-summation partial traces and table-based entropy sums.

use splitmeas::constructions::{candidate_informations, construction1, construction2, induced_distribution};
use splitmeas::generators::{bb84_bell_scenario, bb84_ensemble, bell_povm};
use splitmeas::harness::run_trial;
use splitmeas::probability::{
    conditional_mutual_information, entropy, joint_distribution, mi_given_value, mutual_information, MarginalSpec,
};
use splitmeas::qcore::OutcomeLabel;

type C = (f64, f64);
type M2 = [[C; 2]; 2];
type M4 = [[C; 4]; 4];

const TOL: f64 = 1e-10;

fn cmul(a: C, b: C) -> C {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn cadd(a: C, b: C) -> C {
    (a.0 + b.0, a.1 + b.1)
}

fn outer2(v: [f64; 2]) -> M2 {
    let mut m = [[(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = (v[i] * v[j], 0.0);
        }
    }
    m
}

fn outer4(v: [f64; 4]) -> M4 {
    let mut m = [[(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = (v[i] * v[j], 0.0);
        }
    }
    m
}

fn oracle_states() -> [M2; 4] {
    let s = 0.5f64.sqrt();
    [outer2([1.0, 0.0]), outer2([0.0, 1.0]), outer2([s, s]), outer2([s, -s])]
}

fn oracle_bell() -> [M4; 4] {
    let s = 0.5f64.sqrt();
    [
        outer4([s, 0.0, 0.0, s]),
        outer4([s, 0.0, 0.0, -s]),
        outer4([0.0, s, s, 0.0]),
        outer4([0.0, s, -s, 0.0]),
    ]
}

fn kron(a: &M2, b: &M2) -> M4 {
    let mut m = [[(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = cmul(a[i / 2][j / 2], b[i % 2][j % 2]);
        }
    }
    m
}

fn trace_prod4(a: &M4, b: &M4) -> C {
    let mut acc = (0.0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            acc = cadd(acc, cmul(a[i][j], b[j][i]));
        }
    }
    acc
}

/// table[a1][a2][b] = Tr[(φ_{a1} ⊗ φ_{a2}) M_b] / 16
fn oracle_table() -> [[[f64; 4]; 4]; 4] {
    let st = oracle_states();
    let bell = oracle_bell();
    let mut t = [[[0.0; 4]; 4]; 4];
    for a1 in 0..4 {
        for a2 in 0..4 {
            let rho = kron(&st[a1], &st[a2]);
            for b in 0..4 {
                let z = trace_prod4(&rho, &bell[b]);
                assert!(z.1.abs() < 1e-15);
                t[a1][a2][b] = z.0 / 16.0;
            }
        }
    }
    t
}

fn h(ps: impl IntoIterator<Item = f64>) -> f64 {
    ps.into_iter().filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum()
}

struct OracleEntropies {
    h_all: f64,
    h_b: f64,
    h_a1a2: f64,
    h_a1: f64,
    h_a1b: f64,
    h_a2b: f64,
}

fn oracle_entropies(t: &[[[f64; 4]; 4]; 4]) -> OracleEntropies {
    let mut p_b = [0.0; 4];
    let mut p_a1a2 = [[0.0; 4]; 4];
    let mut p_a1 = [0.0; 4];
    let mut p_a1b = [[0.0; 4]; 4];
    let mut p_a2b = [[0.0; 4]; 4];
    let mut all = Vec::new();
    for a1 in 0..4 {
        for a2 in 0..4 {
            for b in 0..4 {
                let p = t[a1][a2][b];
                all.push(p);
                p_b[b] += p;
                p_a1a2[a1][a2] += p;
                p_a1[a1] += p;
                p_a1b[a1][b] += p;
                p_a2b[a2][b] += p;
            }
        }
    }
    OracleEntropies {
        h_all: h(all),
        h_b: h(p_b),
        h_a1a2: h(p_a1a2.into_iter().flatten()),
        h_a1: h(p_a1),
        h_a1b: h(p_a1b.into_iter().flatten()),
        h_a2b: h(p_a2b.into_iter().flatten()),
    }
}

/// Tr_2[(I ⊗ φ) M] by index summation: out[i][i'] = Σ_{j,k} φ[j][k] M[(i,k),(i',j)].
fn oracle_project_onto_first(phi: &M2, m: &M4) -> M2 {
    let mut out = [[(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for ip in 0..2 {
            let mut acc = (0.0, 0.0);
            for j in 0..2 {
                for k in 0..2 {
                    acc = cadd(acc, cmul(phi[j][k], m[i * 2 + k][ip * 2 + j]));
                }
            }
            out[i][ip] = acc;
        }
    }
    out
}

fn oracle_mi(joint: &[Vec<f64>]) -> f64 {
    let rows: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let n_cols = joint[0].len();
    let cols: Vec<f64> = (0..n_cols).map(|c| joint.iter().map(|r| r[c]).sum()).collect();
    h(rows) + h(cols) - h(joint.iter().flatten().copied())
}

fn spec(a: &[usize]) -> MarginalSpec {
    MarginalSpec::new(a.to_vec()).unwrap()
}

#[test]
fn joint_table_matches_oracle() {
    let t = oracle_table();
    let d = joint_distribution(&bb84_bell_scenario()).unwrap();
    assert_eq!(d.axis_sizes(), &[4, 4, 4]);
    for a1 in 0..4 {
        for a2 in 0..4 {
            for b in 0..4 {
                assert!((d.get(&[a1, a2, b]) - t[a1][a2][b]).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn frozen_oracle_values() {
    // values computed by the oracle above and independently with numpy
    let t = oracle_table();
    let e = oracle_entropies(&t);
    assert!((e.h_b - 2.0).abs() < TOL);
    assert!((e.h_a1a2 - 4.0).abs() < TOL);
    let i_joint = e.h_a1a2 + e.h_b - e.h_all;
    assert!((i_joint - 0.5).abs() < TOL);
}

#[test]
fn entropies_and_information_match_oracle() {
    let t = oracle_table();
    let e = oracle_entropies(&t);
    let d = joint_distribution(&bb84_bell_scenario()).unwrap();
    assert!((entropy(&d, &spec(&[2])).unwrap() - e.h_b).abs() < TOL);
    let i_joint = mutual_information(&d, &spec(&[0, 1]), &spec(&[2])).unwrap();
    assert!((i_joint - (e.h_a1a2 + e.h_b - e.h_all)).abs() < TOL);
    // I(A1; B | A2) = H(A1,A2) + H(A2,B) − H(A1,A2,B) − H(A2), with H(A2) = 2
    let cmi = conditional_mutual_information(&d, &spec(&[0]), &spec(&[2]), &spec(&[1])).unwrap();
    assert!((cmi - (e.h_a1a2 + e.h_a2b - e.h_all - 2.0)).abs() < TOL);
    // chain slack H(A1|B) − H(A1|A2,B)
    let chain = (e.h_a1b - e.h_b) - (e.h_all - e.h_a2b);
    assert!((chain - 0.5).abs() < TOL);
    assert!((e.h_a1 - 2.0).abs() < TOL);
}

#[test]
fn per_slice_information_matches_oracle() {
    let t = oracle_table();
    let d = joint_distribution(&bb84_bell_scenario()).unwrap();
    for a2 in 0..4 {
        let slice: Vec<Vec<f64>> = (0..4).map(|a1| t[a1][a2].iter().map(|p| p * 4.0).collect()).collect();
        let expected = oracle_mi(&slice);
        assert!((expected - 0.5).abs() < TOL);
        let got = mi_given_value(&d, &spec(&[0]), &spec(&[2]), 1, a2).unwrap();
        assert!((got - expected).abs() < TOL);
    }
}

#[test]
fn construction1_elements_match_index_summation_oracle() {
    let s = bb84_bell_scenario();
    let e = construction1(&s, 0).unwrap();
    assert_eq!(e.povm.len(), 16);
    let st = oracle_states();
    let bell = oracle_bell();
    for el in e.povm.elements() {
        let OutcomeLabel::Composite { context, outcome } = &el.label else {
            panic!("composite label expected");
        };
        let expected = oracle_project_onto_first(&st[context[0]], &bell[*outcome]);
        for i in 0..2 {
            for j in 0..2 {
                let got = el.matrix.get(i, j);
                assert!((got.re - expected[i][j].0 * 0.25).abs() < 1e-15);
                assert!((got.im - expected[i][j].1 * 0.25).abs() < 1e-15);
            }
        }
    }
    // relabeling identity: Pr{A1 = a1, B1 = (a2, b)} = Pr{A1 = a1, A2 = a2, B = b}
    let t = oracle_table();
    let d1 = induced_distribution(&s, &e).unwrap();
    for a1 in 0..4 {
        for a2 in 0..4 {
            for b in 0..4 {
                assert!((d1.get(&[a1, a2 * 4 + b]) - t[a1][a2][b]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn construction2_matches_exhaustive_search() {
    let s = bb84_bell_scenario();
    let st = oracle_states();
    let bell = oracle_bell();
    let mut oracle_scores = Vec::new();
    for ctx in 0..4 {
        let sub: Vec<M2> = bell.iter().map(|m| oracle_project_onto_first(&st[ctx], m)).collect();
        let table: Vec<Vec<f64>> = (0..4)
            .map(|a1| {
                sub.iter()
                    .map(|m| {
                        let mut tr = 0.0;
                        for i in 0..2 {
                            for j in 0..2 {
                                tr += cmul(st[a1][i][j], m[j][i]).0;
                            }
                        }
                        tr * 0.25
                    })
                    .collect()
            })
            .collect();
        oracle_scores.push(oracle_mi(&table));
    }
    let best = oracle_scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let first_best = oracle_scores.iter().position(|&x| x > best - 1e-12).unwrap();

    let candidates = candidate_informations(&s, 0).unwrap();
    for ((ctx, mi), expected) in candidates.iter().zip(&oracle_scores) {
        assert!((mi - expected).abs() < TOL, "context {ctx:?}");
    }
    let c2 = construction2(&s, 0).unwrap();
    assert_eq!(c2.chosen_context, Some(vec![first_best]));
    assert_eq!(first_best, 0);
    for (el, m) in c2.povm.elements().iter().zip(&bell) {
        let expected = oracle_project_onto_first(&st[0], m);
        for i in 0..2 {
            for j in 0..2 {
                assert!((el.matrix.get(i, j).re - expected[i][j].0).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn trial_values_match_oracle() {
    let t = oracle_table();
    let e = oracle_entropies(&t);
    let r = run_trial(&bb84_bell_scenario(), None).unwrap();
    let i_joint = e.h_a1a2 + e.h_b - e.h_all;
    assert!((r.i_joint - i_joint).abs() < TOL);
    // I(A1; B1) = H(A1) + H(B1) − H(A1,B1) with H(B1) = H(A2,B), H(A1,B1) = H(all)
    let i1 = e.h_a1 + e.h_a2b - e.h_all;
    assert!((r.i_c1[0] - i1).abs() < TOL);
    assert!((r.i_c1[1] - 0.5).abs() < TOL);
    assert!((r.i_c2[0] - 0.5).abs() < TOL && (r.i_c2[1] - 0.5).abs() < TOL);
    assert!((r.slacks["thm1"] - 0.5).abs() < TOL);
    assert!((r.slacks["chain_1"] - 0.5).abs() < TOL);
    assert!(r.slacks["dominance_1"].abs() < TOL);
    assert_eq!(r.chosen_contexts, vec![vec![0], vec![0]]);
    assert!(r.passed(), "{:?}", r.violations());
}

#[test]
fn generator_objects_match_oracle_inputs() {
    let ens = bb84_ensemble();
    for (s, o) in ens.states().iter().zip(oracle_states()) {
        for i in 0..2 {
            for j in 0..2 {
                assert!((s.matrix().get(i, j).re - o[i][j].0).abs() < 1e-15);
            }
        }
    }
    for (m, o) in bell_povm().matrices().zip(oracle_bell()) {
        for i in 0..4 {
            for j in 0..4 {
                assert!((m.get(i, j).re - o[i][j].0).abs() < 1e-15);
            }
        }
    }
}

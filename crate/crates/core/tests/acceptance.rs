//! One pass/fail line per acceptance criterion.

mod common;

use std::process::Command;

use common::{data_file, gallery_samples, SyzygyOracle, CORPUS};
use pdmod::cc::{build_sequence, euler_poincare_dims, generate_cc, verify_cc};
use pdmod::duality::{differential_rank, double_duality_test, minimum_parametrization};
use pdmod::format::{parse_operator_file, print_operator_file};
use pdmod::gallery::{self, Metric};
use pdmod::jet::{characters, find_delta_regular, is_involutive, janet_tabular, JetSystem};
use pdmod::random::{sample_operators, sample_pairs};
use pdmod::rowmodule::row_module_eq;
use pdmod::{DiffOp, MultiIndex, OpMatrix, RatFunc};

#[derive(Default)]
struct Criterion {
    failures: Vec<String>,
    /// Sub-checks that cannot hold as stated, with the reason.
    unattainable: Vec<String>,
    checks: usize,
}

impl Criterion {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        self.checks += 1;
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn check_unattainable(&mut self, ok: bool, what: &str, why: &str) {
        self.checks += 1;
        if !ok {
            self.unattainable.push(format!("{what}: {why}"));
        }
    }

    fn passed(&self) -> bool {
        self.failures.is_empty() && self.unattainable.is_empty()
    }
}

fn rme(a: &OpMatrix, b: &OpMatrix) -> bool {
    row_module_eq(a, b).unwrap_or(false)
}

fn criterion_1() -> Criterion {
    let mut c = Criterion::default();
    let d = gallery::contact_system();
    let ch = characters(&JetSystem::from_operator(&d));
    c.check(ch.alpha == vec![3, 2, 1], format!("alpha = {:?}", ch.alpha));
    c.check(ch.beta == vec![0, 1, 2], format!("beta = {:?}", ch.beta));
    c.check(ch.dim_g_q == 6, format!("dim g1 = {}", ch.dim_g_q));
    let cc = generate_cc(&d, 4).unwrap().cc;
    c.check(cc.nrows() == 1 && rme(&cc, &gallery::contact_cc()), "generate_cc(contact) = zeta");
    c.check(d.adjoint().entries_eq(&d.neg()), "ad(D) = -D");
    c.check(d.matmul(&gallery::contact_parametrization()).unwrap().is_zero(), "D . parametrization = 0");
    c.check(euler_poincare_dims(&[1, 3, 3, 1]) == 0, "euler_poincare(1,3,3,1)");
    let p = minimum_parametrization(&gallery::contact_system(), 4).unwrap();
    c.check(
        p.ncols() == 1 && rme(&p.adjoint(), &gallery::contact_parametrization().adjoint()),
        "minimum parametrization of D is the injective one",
    );
    let pz = minimum_parametrization(&gallery::contact_cc(), 4).unwrap();
    let one = pz.ncols() == 1 && rme(&pz.adjoint(), &gallery::contact_parametrization().adjoint());
    c.check_unattainable(
        one,
        &format!("minimum_parametrization(zeta) has {} potentials", pz.ncols()),
        "zeta has differential rank 1 on 3 unknowns, so its kernel has rank 2 and needs 2 potentials; \
         the 1-potential injective parametrization parametrizes D, and zeta . parametrization != 0",
    );
    c.check(
        !gallery::contact_cc().matmul(&gallery::contact_parametrization()).unwrap().is_zero(),
        "zeta does not annihilate the injective parametrization",
    );
    c
}

fn criterion_2() -> Criterion {
    let mut c = Criterion::default();
    let e2 = Metric::euclid(2);
    let cc = generate_cc(&gallery::killing(2, &e2).unwrap(), 4).unwrap().cc;
    let expected = parse_operator_file("dim 2\nunknowns O11 O12 O22\neq r: d22(O11) + d11(O22) - 2*d12(O12)\n").unwrap();
    c.check(cc.nrows() == 1 && rme(&cc, &expected), format!("CC of Killing: {}", cc.row_string(0)));
    c.check(rme(&cc.adjoint(), &gallery::airy()), "ad(CC) = Airy");
    let airy_cc = generate_cc(&gallery::airy(), 4).unwrap().cc;
    c.check(airy_cc.nrows() == 2 && rme(&airy_cc, &gallery::cauchy(2, &e2).unwrap()), "CC of Airy = Cauchy");
    let tab = janet_tabular(&JetSystem::from_operator(&gallery::airy())).render();
    c.check(tab == "[1 2 / 1 • / 1 •]", format!("Airy tabular {tab}"));
    c
}

fn criterion_3() -> Criterion {
    let mut c = Criterion::default();
    let e3 = Metric::euclid(3);
    let b = gallery::beltrami();
    c.check(rme(&gallery::riemann(3, &e3).unwrap().adjoint(), &b), "ad(Riemann) = Beltrami");
    let w = gallery::sym_weights(3);
    let plain = b.plain();
    c.check(plain.adjoint_paired(&w, &w).unwrap().entries_eq(&plain), "Beltrami self-adjoint under diag(1,2,2,1,2,1)");
    let ch = characters(&JetSystem::from_operator(&b));
    c.check(ch.alpha == vec![18, 9, 3] && ch.dim_g_q == 30, format!("Beltrami characters {:?}", ch.alpha));
    let cauchy = gallery::cauchy(3, &e3).unwrap();
    let bcc = generate_cc(&b, 5).unwrap().cc;
    c.check(bcc.nrows() == 3 && rme(&bcc, &cauchy), "CC of Beltrami = Cauchy");
    for (name, op) in [("Maxwell", gallery::maxwell()), ("Morera", gallery::morera())] {
        let (_, s) = find_delta_regular(&JetSystem::from_operator(&op), 0, 16);
        let ch = characters(&s);
        c.check(is_involutive(&s).is_involutive(), format!("{name} involutive in delta-regular coordinates"));
        c.check(ch.alpha == vec![9, 3, 0] && ch.dim_g_q == 12, format!("{name} characters {:?}", ch.alpha));
        let cc = generate_cc(&op, 5).unwrap().cc;
        c.check(rme(&cc, &cauchy), format!("CC of {name} = Cauchy"));
    }
    c
}

fn criterion_4() -> Criterion {
    let mut c = Criterion::default();
    let m = Metric::minkowski(4);
    let e = gallery::einstein(4, &m).unwrap();
    c.check(verify_cc(&gallery::div_op(4, &m).unwrap(), &e).unwrap(), "div . Einstein = 0");
    c.check(rme(&e.adjoint(), &e), "ad(Einstein) = Einstein");
    let s = JetSystem::from_operator(&e);
    let t = janet_tabular(&s);
    c.check(t.beta[3] == 6 && t.beta[2] == 4, format!("class counts {:?}", t.beta));
    let ch = characters(&s);
    c.check(ch.alpha == vec![40, 30, 16, 4], format!("characters {:?}", ch.alpha));
    c.check(ch.dim_g_q == 90 && ch.dim_g_q1 == 164, format!("dim g2 = {}, dim g3 = {}", ch.dim_g_q, ch.dim_g_q1));
    let sym = e.principal_symbol(2);
    c.check(sym.determinant().unwrap().is_zero() && sym.generic_rank() == 6, "symbol singular of rank 6");
    c.check(differential_rank(&e).unwrap().rank == 6, "differential rank 6");
    c
}

fn criterion_5() -> Criterion {
    let mut c = Criterion::default();
    let m = Metric::minkowski(4);
    let rep = double_duality_test(&gallery::einstein(4, &m).unwrap(), 4).unwrap();
    c.check(!rep.torsion_free, "Einstein module has torsion");
    c.check(rep.torsion_generators.len() == 10, format!("{} torsion generators", rep.torsion_generators.len()));
    let wave = DiffOp::from_terms((0..4).map(|i| {
        (MultiIndex::unit(i).plus_unit(i), RatFunc::int(if i == 3 { -1 } else { 1 }))
    }));
    let certified = rep.annihilators.iter().all(|p| {
        p.as_ref().is_some_and(|p| p.order() == 2 && (p == &wave || p == &wave.neg()))
    });
    c.check(certified, "every generator is annihilated by the wave operator");
    let seq = build_sequence(&gallery::killing(4, &m).unwrap(), 2, 4).unwrap();
    c.check(seq.fiber_dims == vec![4, 10, 20, 20], format!("Killing sequence {:?}", seq.fiber_dims));
    c.check(seq.orders == vec![1, 2, 1], format!("orders {:?}", seq.orders));
    c.check(euler_poincare_dims(&[6, 20, 20, 10, 4]) == 0, "euler_poincare(6,20,20,10,4)");
    c
}

fn properties(c: &mut Criterion, name: &str, a: &OpMatrix) {
    c.check(a.adjoint().adjoint().entries_eq(a), format!("{name}: ad(ad(A)) = A"));
    let r = differential_rank(a).map(|r| r.rank);
    let ra = differential_rank(&a.adjoint()).map(|r| r.rank);
    c.check(r.is_ok() && r == ra, format!("{name}: rank {r:?} vs adjoint {ra:?}"));
    let Ok(res) = generate_cc(a, a.order() + 5) else {
        c.check(false, format!("{name}: generate_cc failed"));
        return;
    };
    c.check(verify_cc(&res.cc, a).unwrap_or(false), format!("{name}: CC annihilates A"));
    if a.is_constant_coeff() {
        let r = res.order.max(res.completion_order);
        let oracle = SyzygyOracle::new(a, r);
        let mut module = pdmod::rowmodule::RowModule::from_matrix(&res.cc);
        let all_generated = oracle.syzygies().iter().all(|s| module.contains(s).unwrap_or(false));
        let all_found = (0..res.cc.nrows()).all(|i| oracle.contains(&res.cc.row(i)));
        c.check(all_generated && all_found, format!("{name}: CC agrees with the syzygy oracle up to order {r}"));
    }
}

fn criterion_6() -> Criterion {
    let mut c = Criterion::default();
    let samples = gallery_samples();
    for (name, a) in &samples {
        properties(&mut c, name, a);
    }
    for (k, a) in sample_operators(0, 50).iter().enumerate() {
        properties(&mut c, &format!("random #{k}"), a);
    }
    let mut pairs: Vec<(String, OpMatrix, OpMatrix)> = Vec::new();
    for (na, a) in &samples {
        for (nb, b) in &samples {
            if a.n() == b.n() && a.ncols() == b.nrows() && a.source_weights() == b.target_weights() {
                pairs.push((format!("{na} . {nb}"), a.clone(), b.clone()));
            }
        }
    }
    for (k, (a, b)) in sample_pairs(0, 50).into_iter().enumerate() {
        pairs.push((format!("random pair #{k}"), a, b));
    }
    for (name, a, b) in &pairs {
        let lhs = a.matmul(b).unwrap().adjoint();
        let rhs = b.adjoint().matmul(&a.adjoint()).unwrap();
        c.check(lhs.entries_eq(&rhs), format!("{name}: ad(AB) = ad(B) ad(A)"));
    }
    c
}

fn criterion_7() -> Criterion {
    let mut c = Criterion::default();
    for n in 2..=4 {
        let m = if n == 4 { Metric::minkowski(4) } else { Metric::euclid(n) };
        let f = gallery::dim_formulas(n);
        let k = gallery::killing(n, &m).unwrap();
        c.check(k.nrows() == f.killing_target, format!("n={n}: Killing rows"));
        let riem = generate_cc(&k, 4).unwrap().cc;
        c.check(riem.nrows() == f.riemann, format!("n={n}: {} Riemann rows, expected {}", riem.nrows(), f.riemann));
        c.check(rme(&riem, &gallery::riemann(n, &m).unwrap()), format!("n={n}: CC of Killing = Riemann"));
        let bianchi = generate_cc(&riem, 5).unwrap().cc;
        c.check(bianchi.nrows() == f.bianchi, format!("n={n}: {} Bianchi rows, expected {}", bianchi.nrows(), f.bianchi));
    }
    c
}

fn pdmod(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_pdmod")).args(args).output().expect("run pdmod");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn criterion_8() -> Criterion {
    let mut c = Criterion::default();
    for file in CORPUS {
        let text = data_file(file);
        let a = parse_operator_file(&text).unwrap();
        let printed = print_operator_file(&a);
        let b = parse_operator_file(&printed).unwrap();
        c.check(a == b && print_operator_file(&b) == printed, format!("{file}: round trip"));
    }
    let (code, _) = pdmod(&["torsion", "--gallery", "einstein"]);
    c.check(code == 1, format!("torsion --gallery einstein exits {code}"));
    let maxwell = format!("{}/tests/data/maxwell.ops", env!("CARGO_MANIFEST_DIR"));
    for args in [
        vec!["involution", "--file", maxwell.as_str(), "--seed", "7", "--format", "json"],
        vec!["cc", "--gallery", "killing", "--n", "4", "--metric", "minkowski", "--seed", "3"],
        vec!["torsion", "--gallery", "einstein", "--seed", "11", "--format", "json"],
    ] {
        let first = pdmod(&args);
        let second = pdmod(&args);
        c.check(first == second && !first.1.is_empty(), format!("byte-identical reports for {args:?}"));
    }
    c
}

fn main() {
    let criteria: [(&str, fn() -> Criterion); 8] = [
        ("contact structure", criterion_1),
        ("plane elasticity", criterion_2),
        ("space elasticity", criterion_3),
        ("Einstein operator", criterion_4),
        ("double duality on Einstein", criterion_5),
        ("duality and rank properties", criterion_6),
        ("dimension formulas", criterion_7),
        ("command line", criterion_8),
    ];
    let mut unexpected = Vec::new();
    for (i, (title, run)) in criteria.iter().enumerate() {
        let c = run();
        let verdict = if c.passed() { "PASS" } else { "FAIL" };
        println!("criterion {} ({title}): {verdict} [{} checks]", i + 1, c.checks);
        for f in &c.failures {
            println!("    failed: {f}");
            unexpected.push(format!("criterion {}: {f}", i + 1));
        }
        for u in &c.unattainable {
            println!("    unattainable as stated: {u}");
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:#?}");
        std::process::exit(1);
    }
}

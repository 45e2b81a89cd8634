use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use phvfe::catalog::{builtin, builtin_instances, load_instance, CatalogConfig};
use phvfe::characters::MultChar;
use phvfe::field::FiniteField;
use phvfe::fourier::{DftMode, DftPlan};
use phvfe::func_eq::{build_phi, compute_table, run_field, FieldData, FitOptions, TableOptions};
use phvfe::Error;

fn fd(q: u64) -> FieldData {
    FieldData::new(FiniteField::of_order(q).unwrap(), None).unwrap()
}

#[test]
fn phi_is_equivariant() {
    // φ_χ(g·x) = χ(α(g)) φ_χ(x)
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for q in [5u64, 7, 9] {
        let data = fd(q);
        let field = data.field();
        for inst in builtin_instances(field) {
            if (q as usize).pow(inst.n as u32) > 5000 {
                continue;
            }
            let group = inst.group.clone().unwrap();
            for rho in inst.rho_names() {
                for k in [1i64, 2, 3] {
                    let chi = MultChar::new(field, k);
                    let phi = build_phi(&inst, rho, chi, &data.ctx).unwrap();
                    for _ in 0..20 {
                        let g = group.sample(field, inst.n, &mut rng);
                        let idx = rand::Rng::gen_range(&mut rng, 0..phi.shape.size());
                        let x = phi.shape.point(idx);
                        let lhs = phi.get(&g.act(field, &x));
                        let rhs = data.ctx.chi(chi, g.alpha(field, inst.d)) * phi.get(&x);
                        assert!((lhs - rhs).norm() < 1e-12, "{} / {rho} over F_{q}", inst.name);
                    }
                }
            }
        }
    }
}

#[test]
fn tables_are_deterministic_and_modes_agree() {
    let data = fd(7);
    let inst = builtin("sym_det_2", 7).unwrap();
    let plan = DftPlan::standard(data.field(), &inst.pairing, 1 << 20).unwrap();
    let fast = TableOptions::default();
    let naive = TableOptions { mode: DftMode::Naive, ..fast };
    let a = compute_table(&inst, "sign", &data, &plan, &fast).unwrap();
    let b = compute_table(&inst, "sign", &data, &plan, &fast).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_csv(), b.to_csv());
    let c = compute_table(&inst, "sign", &data, &plan, &naive).unwrap();
    assert_eq!(a.twist, c.twist);
    for (x, y) in a.rows.iter().zip(&c.rows) {
        assert!((x.c() - y.c()).norm() < 1e-10);
    }
}

#[test]
fn every_small_builtin_verifies() {
    for (q, limit) in [(3u64, 20_000usize), (5, 20_000), (7, 3_000), (9, 1_000), (25, 700)] {
        let data = fd(q);
        for inst in builtin_instances(data.field()) {
            if (q as usize).pow(inst.n as u32) > limit {
                continue;
            }
            for rho in inst.rho_names() {
                let run = run_field(&inst, rho, &data, &TableOptions::default(), &FitOptions::default())
                    .unwrap_or_else(|e| panic!("{} / {rho} over F_{q}: {e}", inst.name));
                assert!(run.table.unique_twist(), "{} / {rho} over F_{q}", inst.name);
                assert!(run.scan.sets_match, "{} / {rho} over F_{q}: {:?}", inst.name, run.scan);
                assert!((run.fit.zeta_abs - 1.0).abs() < 1e-6);
                assert_eq!(run.fit.lambdas.len(), run.fit.m + inst.d);
                // every fitted character is defined over the prime field here
                assert_eq!(run.fit.k0_q, data.field().p());
            }
        }
    }
}

#[test]
fn matrix_det_2_over_f3_oracle() {
    let data = fd(3);
    let inst = builtin("matrix_det_2", 3).unwrap();
    let run = run_field(&inst, "trivial", &data, &TableOptions::default(), &FitOptions::default()).unwrap();
    // 48 invertible 2x2 matrices over F_3
    let u = (0..81).filter(|&i| !inst.f.eval(data.field(), &run_point(i)).is_zero()).count();
    assert_eq!(u, 48);
    assert_eq!(run.fit.m, 0);
    assert_eq!(run.fit.lambdas.len(), 2);
}

fn run_point(i: usize) -> Vec<phvfe::field::FieldElement> {
    phvfe::grid::GridShape::new(3, 4, 1 << 10).unwrap().point(i)
}

#[test]
fn config_defined_instance_runs() {
    let f5 = FiniteField::prime(5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let cfg = CatalogConfig::new(
        "# hyperbolic plane\nname: hyperbolic\ncharacteristic: odd\nn: 2\nf: x1*x2\nf_dual: x1*x2\nf_dual_scale: solve\npairing: rows 0,1;1,0\ngroup: none\n",
    );
    let inst = load_instance(&cfg, &f5, &mut rng).unwrap();
    let data = fd(5);
    let run = run_field(&inst, "trivial", &data, &TableOptions::default(), &FitOptions::default()).unwrap();
    assert!(run.scan.sets_match);
    assert_eq!(run.fit.lambdas.len(), 2);
}

#[test]
fn error_paths() {
    let data = fd(5);
    let inst = builtin("gl1_line", 5).unwrap();
    assert!(matches!(
        run_field(&inst, "spin", &data, &TableOptions::default(), &FitOptions::default()),
        Err(Error::UnknownRho(_))
    ));
    let other = builtin("gl1_line", 7).unwrap();
    assert!(matches!(
        run_field(&other, "trivial", &data, &TableOptions::default(), &FitOptions::default()),
        Err(Error::Characteristic { .. })
    ));
    let big = builtin("matrix_det_3", 5).unwrap();
    let capped = TableOptions { cap: 1 << 16, ..TableOptions::default() };
    assert!(matches!(
        run_field(&big, "trivial", &data, &capped, &FitOptions::default()),
        Err(Error::GridTooLarge { .. })
    ));
}

#[test]
fn wrong_trace_is_caught() {
    // without the sign candidate the odd quadric has no constant-ratio twist
    let f7 = FiniteField::prime(7).unwrap();
    let mut inst = builtin("quadratic_3", 7).unwrap();
    inst.epsilon_candidates = vec!["trivial".into()];
    let data = fd(7);
    let plan = DftPlan::standard(&f7, &inst.pairing, 1 << 20).unwrap();
    match compute_table(&inst, "trivial", &data, &plan, &TableOptions::default()) {
        Err(Error::NoDualTwist { candidate, residual, .. }) => {
            assert_eq!(candidate, "trivial");
            assert!(residual > 0.5);
        }
        other => panic!("expected NoDualTwist, got {other:?}"),
    }
}

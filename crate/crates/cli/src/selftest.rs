//! Oracle equivalence on generated instances.

use num_traits::Zero;
use rnsla::matrix::{gen_ffs_like, plant_dependent_row, CooMatrix, GeneratorParams, SparseMatrix};
use rnsla::oracle::{oracle_iterate, oracle_spmv_mod};
use rnsla::rns::{random_elements, RnsBasis, RnsVector};
use rnsla::spmv::{spmv_iterate, Format, Partitioning, SpmvOptions, SpmvPlan};
use rnsla::wiedemann::{check_kernel, solve, SolveOptions};
use rnsla::BigUint;

pub struct Outcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Every format, flag combination, worker count and partitioning.
pub fn all_options(workers: &[usize]) -> Vec<SpmvOptions> {
    let mut out = Vec::new();
    for format in Format::ALL {
        for &w in workers {
            for partitioning in [Partitioning::Scalar, Partitioning::ResidueVector] {
                for flags in 0..8u32 {
                    let use_compression = flags & 1 != 0;
                    if use_compression && format != Format::Csr {
                        continue;
                    }
                    out.push(SpmvOptions {
                        format,
                        workers: w,
                        partitioning,
                        balance: flags & 4 != 0,
                        use_compression,
                        use_reordering: flags & 2 != 0,
                        check_bounds: false,
                    });
                }
            }
        }
    }
    out
}

fn equivalence(m: &CooMatrix, basis: &RnsBasis, seed: u64) -> Result<usize, String> {
    let ell = basis.ell();
    let v = random_elements(ell, m.n_cols(), seed, 0);
    let expected = oracle_spmv_mod(m, &v, ell).map_err(|e| e.to_string())?;
    let src = RnsVector::from_ints(basis, &v).map_err(|e| e.to_string())?;
    let mut reference: Option<RnsVector> = None;
    let configs = all_options(&[1, 4]);
    for opts in &configs {
        let plan = SpmvPlan::new(m, basis, *opts).map_err(|e| e.to_string())?;
        let out = plan.multiply(&src).map_err(|e| e.to_string())?;
        if out.to_canonical(basis) != expected {
            return Err(format!("{opts:?} disagrees with the oracle"));
        }
        match &reference {
            Some(r) if r.as_raw() != out.as_raw() => return Err(format!("{opts:?} differs in residues")),
            Some(_) => {}
            None => reference = Some(out),
        }
    }
    let plan = SpmvPlan::new(m, basis, SpmvOptions::default()).map_err(|e| e.to_string())?;
    let t = 3 * plan.reduction_frequency() + 1;
    let it = spmv_iterate(&plan, &src, t).map_err(|e| e.to_string())?;
    if it.to_ints(basis) != oracle_iterate(m, &v, ell, t).map_err(|e| e.to_string())? {
        return Err(format!("{t} iterations disagree with the oracle"));
    }
    Ok(configs.len())
}

fn kernel(m: &CooMatrix, basis: &RnsBasis, seed: u64) -> Result<usize, String> {
    let plan = SpmvPlan::new(m, basis, SpmvOptions::default()).map_err(|e| e.to_string())?;
    let (w, report) = solve(&plan, &SolveOptions::new(seed)).map_err(|e| e.to_string())?;
    if w.iter().all(Zero::is_zero) || !check_kernel(m, &w, basis.ell()) {
        return Err("solver output fails the kernel check".into());
    }
    Ok(report.attempts)
}

pub fn run(ell: &BigUint, flavor: rnsla::rns::Flavor, count: usize, n: usize, seed: u64) -> Vec<Outcome> {
    let mut out = Vec::new();
    for i in 0..count as u64 {
        let s = seed.wrapping_add(i);
        let m = match gen_ffs_like(&GeneratorParams::ffs_like(n, (n / 10).clamp(1, 20), s))
            .and_then(|m| plant_dependent_row(&m, s))
        {
            Ok(m) => m,
            Err(e) => {
                out.push(Outcome {
                    name: format!("generate seed={s}"),
                    passed: false,
                    detail: e.to_string(),
                });
                continue;
            }
        };
        let basis = match RnsBasis::build(ell, m.to_csr().max_row_norm().max(1), flavor) {
            Ok(b) => b,
            Err(e) => {
                out.push(Outcome {
                    name: format!("basis seed={s}"),
                    passed: false,
                    detail: e.to_string(),
                });
                continue;
            }
        };
        let (passed, detail) = match equivalence(&m, &basis, s) {
            Ok(k) => (true, format!("{k} configurations")),
            Err(e) => (false, e),
        };
        out.push(Outcome {
            name: format!("spmv seed={s}"),
            passed,
            detail,
        });
        let (passed, detail) = match kernel(&m, &basis, s) {
            Ok(a) => (true, format!("{a} attempt(s)")),
            Err(e) => (false, e),
        };
        out.push(Outcome {
            name: format!("solve seed={s}"),
            passed,
            detail,
        });
    }
    out
}

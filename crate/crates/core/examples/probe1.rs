use picheck_core::corpus::{attack_formula, build_model, AttackId, ModelId};
use picheck_core::indep::EventRelation;
use picheck_core::logic::{check_fm, check_hpfm, CheckBudget, Dialect};
use picheck_core::procs::reset_fresh_names;
use std::time::Instant;

fn main() {
    let rows = [
        ("bac-get-system", AttackId::PhiGet, 4u32, true),
        ("bac-get-spec", AttackId::PhiGet, 4, false),
        ("bac-ch-system", AttackId::PhiCh, 4, true),
        ("bac-ch-spec", AttackId::PhiCh, 4, false),
        ("bac-two-system", AttackId::Phi2, 4, true),
        ("bac-two-spec", AttackId::Phi2, 4, false),
        ("bac-min-system", AttackId::PsiMin, 5, true),
        ("bac-min-spec", AttackId::PsiMin, 5, false),
        ("feldhofer-min-system", AttackId::ChiFeldhofer, 5, true),
        ("feldhofer-min-spec", AttackId::ChiFeldhofer, 5, false),
        ("feldhofer-min-system", AttackId::ChiPrimeFeldhofer, 5, true),
        ("feldhofer-min-spec", AttackId::ChiPrimeFeldhofer, 5, false),
        ("feldhofer-min-error-system", AttackId::PsiErr, 5, true),
        ("feldhofer-min-error-spec", AttackId::PsiErr, 5, false),
        ("feldhofer-min-error-system", AttackId::ChiErr, 5, true),
        ("feldhofer-min-error-spec", AttackId::ChiErr, 5, false),
        ("bac-min-system", AttackId::PhiNondist, 5, true),
        ("bac-min-spec", AttackId::PhiNondist, 5, true),
    ];
    for (model, attack, cap, expect) in rows {
        reset_fresh_names();
        let ep = build_model(ModelId::parse(model).unwrap()).unwrap();
        let phi = attack_formula(attack);
        let budget = CheckBudget::new(cap);
        let t0 = Instant::now();
        let got = match attack.dialect() {
            Dialect::Fm => check_fm(&ep, &phi, &budget),
            Dialect::HpFm => check_hpfm(&ep, &EventRelation::empty(), &phi, &budget),
        };
        match got {
            Ok(o) => println!(
                "{model:28} {attack:20}: holds={} trunc={} expect={expect} {} in {:?}",
                o.holds,
                o.truncated,
                if o.holds == expect { "OK" } else { "** MISMATCH **" },
                t0.elapsed()
            ),
            Err(e) => println!("{model:28} {attack:20}: ERROR {e}"),
        }
    }
}

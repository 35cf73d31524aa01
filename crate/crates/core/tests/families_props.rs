use aligned_einstein::einstein::classify;
use aligned_einstein::exact::{int, UniPoly};
use aligned_einstein::families::{
    certify_family, family_invariants, leading_positive, positive_from, strip_factors, ExistenceSet,
};
use aligned_einstein::spaces::{Catalog, ExpectedFamilyVerdict};
use aligned_einstein::families::FamilyVerdict;
use num_traits::Signed;
use rayon::prelude::*;
use std::sync::OnceLock;

fn verdict(id: &str) -> &'static FamilyVerdict {
    static CELL: OnceLock<Vec<FamilyVerdict>> = OnceLock::new();
    let all = CELL.get_or_init(|| Catalog::bundled().families.par_iter().map(|f| certify_family(f, 40).unwrap()).collect());
    all.iter().find(|v| v.family == id).unwrap()
}

#[test]
fn specialization_commutes_with_classification() {
    let cat = Catalog::bundled();
    for f in &cat.families {
        let inv = family_invariants(f);
        let v = verdict(&f.id);
        assert!(v.members.iter().map(|m| m.m).eq(f.m_min..f.m_min + v.members.len() as i64));
        assert!(v.members.last().unwrap().m >= 40);
        for mv in &v.members {
            let c = classify(&f.instantiate(mv.m).unwrap().space).unwrap();
            let exact = c.invariants.clone().unwrap();
            let m = int(mv.m);
            assert_eq!(inv.delta.eval(&m).unwrap(), exact.delta, "{}@{}", f.id, mv.m);
            assert_eq!(inv.r.eval(&m).unwrap(), exact.r, "{}@{}", f.id, mv.m);
            assert_eq!(inv.s.eval(&m).unwrap(), exact.s, "{}@{}", f.id, mv.m);
            assert_eq!(inv.t.eval(&m).unwrap(), exact.t, "{}@{}", f.id, mv.m);
            assert_eq!(mv.signs, c.invariant_signs().unwrap());
            assert_eq!(mv.exists, c.exists, "{}@{}", f.id, mv.m);
            assert_eq!(v.existence.contains(mv.m), c.exists, "{}@{}", f.id, mv.m);
        }
    }
}

#[test]
fn tail_certificates_cover_the_probe_range() {
    let cat = Catalog::bundled();
    for f in &cat.families {
        let v = verdict(&f.id);
        for c in &v.certificates {
            if let Some(from) = c.constant_from {
                assert!(from <= v.tail_from, "{} {}", f.id, c.name);
            }
        }
        let c = classify(&f.instantiate(v.tail_from + 500).unwrap().space).unwrap();
        assert_eq!(v.existence.contains(v.tail_from + 500), c.exists, "{}", f.id);
    }
}

fn linear(root_num: i64, root_den: i64) -> UniPoly {
    UniPoly::from_i64(&[-root_num, root_den])
}

#[test]
fn su_so_cofactors_are_positive_from_six() {
    let cat = Catalog::bundled();
    let f = cat.family("SUm_SOm1_SOm").unwrap();
    let inv = family_invariants(f);
    let m = UniPoly::from_i64(&[0, 1]);
    let q1 = strip_factors(
        inv.delta.numer(),
        &[(linear(-2, 1), 4), (linear(1, 1), 12), (linear(2, 3), 2), (linear(-1, 1), 3), (linear(1, 3), 12)],
    )
    .unwrap();
    let q2 = strip_factors(inv.r.numer(), &[(linear(1, 1), 6), (linear(1, 3), 10)]).unwrap();
    let q3 = strip_factors(inv.s.numer(), &[(linear(1, 3), 6), (linear(1, 1), 4)]).unwrap();
    assert_eq!([q1.degree(), q2.degree(), q3.degree()], [Some(11), Some(16), Some(6)]);
    for (q, den, k) in [(&q1, inv.delta.denom(), 44), (&q2, inv.r.denom(), 32), (&q3, inv.s.denom(), 16)] {
        assert!(positive_from(q, &int(6)));
        let scale = den.leading();
        assert_eq!(den, &(&m.pow(k) * &UniPoly::constant(scale.clone())));
        assert!(scale.is_positive() && leading_positive(q));
    }
    let v = verdict(&f.id);
    assert_eq!(v.existence, ExistenceSet::Empty);
    assert!(v.matches_expected);
}

#[test]
fn cofactor_stripping_rejects_a_missing_factor() {
    let cat = Catalog::bundled();
    let inv = family_invariants(cat.family("SUm_SOm1_SOm").unwrap());
    assert!(strip_factors(inv.s.numer(), &[(linear(1, 3), 7)]).is_err());
}

#[test]
fn table_of_families() {
    let cat = Catalog::bundled();
    let mut exists = 0;
    for f in &cat.families {
        let v = verdict(&f.id);
        if v.existence.is_existence_family() {
            exists += 1;
        }
        if f.id == "SO2m1Sp_SO2m1Sp" {
            continue;
        }
        assert!(v.matches_expected, "{}: {} vs {:?}", f.id, v.existence, v.expected);
    }
    assert_eq!(cat.families.len(), 12);
    assert_eq!(exists, 9);
    let row1 = verdict("SOsym_SOm1_SOm");
    assert_eq!(row1.expected, ExpectedFamilyVerdict::ExistsIffMLe(8));
    let row11 = verdict("SU2m_SOalt_Spm");
    assert_eq!(row11.existence, ExistenceSet::AtLeast(10));
}

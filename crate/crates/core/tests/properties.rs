use gwcert::bt_tree::Tree;
use gwcert::fieldspec::FieldSpec;
use gwcert::group::SemidirectGroup;
use gwcert::numberfield::FieldElement;
use gwcert::residue::{t_order_rational, Modulus, ResidueRing};
use gwcert::valuation::OwRing;
use gwcert::verify::random_class;
use gwcert::word::Gw;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rational_ow(a: i64, b: i64) -> OwRing {
    let (field, ring) = FieldSpec::rationals().build().unwrap();
    let w = FieldElement::parse(&field, &format!("{a}/{b}")).unwrap();
    OwRing::new(&ring, &w).unwrap()
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a.abs() } else { gcd(b, a % b) }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn order_of_rational_w(a in 2i64..40, b in 1i64..40, qi in 0usize..6, s in 1u32..3) {
        let q = [3u64, 5, 7, 11, 13, 17][qi] as i64;
        prop_assume!(gcd(a, b) == 1 && a != b && a % q != 0 && b % q != 0);
        let o = rational_ow(a, b);
        let n = q.pow(s);
        // w = a/b mod q^s by stepping through powers
        let binv = (1..n).find(|x| (b * x) % n == 1).unwrap();
        let w = (a % n) * binv % n;
        let mut k = 1;
        let mut p = w;
        while p != 1 {
            p = p * w % n;
            k += 1;
        }
        prop_assert_eq!(t_order_rational(&o, q as u64, s).unwrap(), k as u64);
    }

    #[test]
    fn semidirect_group_axioms(seed in 0u64..500, qi in 0usize..3) {
        let q = [3u64, 5, 7][qi];
        let o = rational_ow(2, 1);
        let g = SemidirectGroup::new(ResidueRing::new(&o, Modulus::Rational(q), 2).unwrap(), 2000).unwrap();
        let n = g.order() as u32;
        let pick = |k: u64| ((seed.wrapping_mul(6364136223846793005).wrapping_add(k * 1442695040888963407)) >> 33) as u32 % n;
        let (x, y, z) = (pick(1), pick(2), pick(3));
        prop_assert_eq!(g.mul(g.mul(x, y), z), g.mul(x, g.mul(y, z)));
        prop_assert_eq!(g.mul(x, g.inv(x)), g.identity());
        prop_assert_eq!(g.mul(g.identity(), x), x);
        let (a, b) = g.split(x);
        prop_assert_eq!(g.make(a, b), x);
    }

    #[test]
    fn tree_metric(seed in 0u64..1000, p in prop::sample::select(vec![2u64, 3, 5])) {
        let (_, ring) = FieldSpec::rationals().build().unwrap();
        let tree = Tree::new(&ring, &ring.primes_above(p).unwrap()[0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y, z) = (random_class(&tree, &mut rng, 6), random_class(&tree, &mut rng, 6), random_class(&tree, &mut rng, 6));
        let d = |a, b| tree.distance(a, b).unwrap();
        prop_assert_eq!(d(&x, &y), d(&y, &x));
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z));
        prop_assert_eq!(d(&x, &y) == 0, x == y);
        let path = tree.geodesic(&x, &y).unwrap();
        prop_assert_eq!(path.len() as u64, d(&x, &y) + 1);
        prop_assert!(path.windows(2).all(|e| d(&e[0], &e[1]) == 1));
    }

    #[test]
    fn gw_group_laws(x1 in -20i64..20, z1 in -4i64..4, x2 in -20i64..20, z2 in -4i64..4, x3 in -20i64..20, z3 in -4i64..4) {
        let o = rational_ow(3, 2);
        let gw = Gw::new(&o).unwrap();
        let (a, b, c) = (gw.int_element(x1, z1), gw.int_element(x2, z2), gw.int_element(x3, z3));
        prop_assert_eq!(gw.mul(&gw.mul(&a, &b), &c), gw.mul(&a, &gw.mul(&b, &c)));
        prop_assert_eq!(gw.mul(&a, &gw.inv(&a)), gw.identity());
        let s = gw.standard_generators();
        let short = gw.int_element(x1 % 4, z1 % 2);
        let la = gw.word_length(&short, &s, 200_000).unwrap();
        prop_assert_eq!(gw.word_length(&gw.inv(&short), &s, 200_000).unwrap(), la);
    }
}

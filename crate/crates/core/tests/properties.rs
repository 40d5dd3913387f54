use proptest::prelude::*;
use twistq::f2::{kernel_basis, rank, solve, BitMatrix, BitVector};
use twistq::metrics::{min_weight, mitm_search, QuadForm, SearchOutcome, Target};
use twistq::operators::{commutator, inverse, multiply, PhasePolyOp};
use twistq::protocol::DenseState;

fn bitvec(n: usize) -> impl Strategy<Value = BitVector> {
    proptest::collection::vec(any::<bool>(), n).prop_map(|b| BitVector::from_bools(&b))
}

fn matrix(r: usize, c: usize) -> impl Strategy<Value = BitMatrix> {
    proptest::collection::vec(bitvec(c), r).prop_map(move |rows| BitMatrix::from_rows(c, rows))
}

fn op(n: usize) -> impl Strategy<Value = PhasePolyOp> {
    (bitvec(n), bitvec(n), proptest::collection::vec((0..n, 0..n), 0..4), any::<bool>()).prop_map(move |(x, z, cz, sign)| {
        let mut o = PhasePolyOp::identity(n);
        o.x = x;
        o.z = z;
        o.sign = sign;
        for (p, q) in cz {
            if p != q {
                o.toggle_cz(p, q);
            }
        }
        o
    })
}

/// Column-by-column matrix of an operator on n ≤ 4 qubits.
fn dense(o: &PhasePolyOp) -> Vec<Vec<f64>> {
    let dim = 1 << o.n();
    (0..dim)
        .map(|c| {
            let mut st = DenseState::from_amplitudes((0..dim).map(|i| f64::from(u8::from(i == c))).collect());
            st.apply(o);
            st.amplitudes().to_vec()
        })
        .collect()
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    // columns: (AB)e_c = A(B e_c)
    let dim = a.len();
    (0..dim).map(|c| (0..dim).map(|r| (0..dim).map(|k| a[k][r] * b[c][k]).sum()).collect()).collect()
}

proptest! {
    #[test]
    fn rank_nullity(m in matrix(6, 9)) {
        let k = kernel_basis(&m);
        prop_assert_eq!(rank(&m) + k.len(), 9);
        for v in &k {
            prop_assert!(m.mul_vec(v).is_zero());
        }
    }

    #[test]
    fn solve_is_consistent(m in matrix(5, 7), x in bitvec(7)) {
        let b = m.mul_vec(&x);
        let y = solve(&m, &b).expect("b is in the image");
        prop_assert_eq!(m.mul_vec(&y), b);
    }

    #[test]
    fn multiply_matches_matrices(p in op(3), q in op(3)) {
        let pq = multiply(&p, &q).unwrap();
        let lhs = dense(&pq);
        let rhs = matmul(&dense(&p), &dense(&q));
        prop_assert_eq!(lhs, rhs);
        prop_assert!(multiply(&p, &inverse(&p)).unwrap().is_identity());
    }

    #[test]
    fn commutator_of_diagonals_is_trivial(mut p in op(4), mut q in op(4)) {
        p.x = BitVector::zeros(4);
        q.x = BitVector::zeros(4);
        prop_assert!(commutator(&p, &q).unwrap().is_identity());
    }

    #[test]
    fn gauss_sum(c in any::<bool>(), lin in bitvec(6), pairs in proptest::collection::btree_set((0usize..6, 0usize..6), 0..8)) {
        let pairs = pairs.into_iter().filter(|(a, b)| a < b).collect();
        let q = QuadForm { constant: c, linear: lin, pairs };
        let brute: i128 = (0u32..64)
            .map(|m| {
                let t = BitVector::from_indices(6, (0..6).filter(|i| m >> i & 1 == 1));
                if q.eval(&t) { -1 } else { 1 }
            })
            .sum();
        prop_assert_eq!(q.exp_sum(), brute);
    }

    #[test]
    fn distance_search_agrees_across_budgets(h in matrix(4, 8), w in bitvec(8)) {
        // exhaustive vs meet-in-the-middle: the kernel has at most 2^8 members
        let gray = min_weight(&h, std::slice::from_ref(&w), Target::Any(1), u64::MAX);
        let brute = (1u32..256)
            .filter_map(|m| {
                let v = BitVector::from_indices(8, (0..8).filter(|i| m >> i & 1 == 1));
                (h.mul_vec(&v).is_zero() && v.dot(&w)).then(|| v.weight())
            })
            .min();
        prop_assert_eq!(gray.weight(), brute);
        let mitm = mitm_search(&h, std::slice::from_ref(&w), Target::Any(1), u64::MAX);
        prop_assert_eq!(mitm.weight(), brute);
        if let SearchOutcome::Found { representative, .. } = &gray {
            let v = BitVector::from_indices(8, representative.iter().copied());
            prop_assert!(h.mul_vec(&v).is_zero() && v.dot(&w));
        }
    }
}

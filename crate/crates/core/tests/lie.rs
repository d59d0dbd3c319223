use eqloc::exact::{self, q, qf, qv, Q};
use eqloc::{build_root_system, Normalization, RootKind, RootSystem};

fn a1() -> RootSystem {
    build_root_system(RootKind::A1, Normalization::Su2).unwrap()
}
fn a2() -> RootSystem {
    build_root_system(RootKind::A2, Normalization::Basic).unwrap()
}
fn g2() -> RootSystem {
    build_root_system(RootKind::G2, Normalization::Basic).unwrap()
}

fn weight(rs: &RootSystem, a: i64, b: i64) -> Vec<Q> {
    let w = &rs.fundamental_weights;
    exact::add(&exact::scale(&q(a), &w[0]), &exact::scale(&q(b), &w[1]))
}

#[test]
fn orders_and_counts() {
    for (rs, w, roots, dim) in [(a1(), 2, 2, 3), (a2(), 6, 6, 8), (g2(), 12, 12, 14)] {
        assert_eq!(rs.weyl_order(), w);
        assert_eq!(rs.roots.len(), roots);
        assert_eq!(rs.group_dimension(), dim);
        // every element is an isometry of the form
        for e in &rs.weyl_elements {
            for a in &rs.roots {
                for b in &rs.roots {
                    assert_eq!(rs.ip(&e.apply(a), &e.apply(b)), rs.ip(a, b));
                }
            }
        }
    }
}

#[test]
fn a1_dimensions() {
    let rs = a1();
    for n in 0..10 {
        let lambda = vec![qf(n, 2)];
        assert!(rs.is_integral(&lambda));
        assert_eq!(rs.dim_irrep(&lambda).unwrap(), q(n + 1));
    }
    assert!(!rs.is_integral(&[qf(1, 3)]));
}

#[test]
fn a2_dimensions_closed_form() {
    let rs = a2();
    for a in 0..8 {
        for b in 0..8 {
            let lambda = qv(&[a, b]);
            assert_eq!(lambda, weight(&rs, a, b));
            assert_eq!(rs.dim_irrep(&lambda).unwrap(), q((a + 1) * (b + 1) * (a + b + 2) / 2));
        }
    }
}

#[test]
fn g2_smallest_dimensions() {
    let rs = g2();
    let mut dims: Vec<i64> = Vec::new();
    let mut closed: Vec<i64> = Vec::new();
    for a in 0..6 {
        for b in 0..6 {
            let lambda = weight(&rs, a, b);
            assert!(rs.is_integral(&lambda) && rs.is_dominant(&lambda));
            let d = rs.dim_irrep(&lambda).unwrap();
            assert!(d.is_integer());
            dims.push(d.to_integer().try_into().unwrap());
            closed.push((a + 1) * (b + 1) * (a + b + 2) * (a + 2 * b + 3) * (a + 3 * b + 4) * (2 * a + 3 * b + 5) / 120);
        }
    }
    dims.sort();
    closed.sort();
    assert_eq!(dims, closed);
    assert_eq!(&dims[..7], &[1, 7, 14, 27, 64, 77, 77]);
}

#[test]
fn vol_poly_is_anti_invariant() {
    for rs in [a1(), a2(), g2()] {
        let p = rs.vol_poly();
        assert_eq!(p.degree(), rs.positive_roots.len());
        assert!(p.expand().is_homogeneous_of_degree(p.degree() as u32));
        let x: Vec<Q> = (0..rs.rank).map(|i| qf(3 + 2 * i as i64, 7)).collect();
        for e in &rs.weyl_elements {
            assert_eq!(p.eval(&e.apply(&x)), q(e.sign as i64) * p.eval(&x));
        }
        assert_eq!(p.eval(&rs.rho), q(1));
    }
}

#[test]
fn orbits_and_symplectic_volume() {
    for rs in [a1(), a2(), g2()] {
        let regular = exact::add(&rs.rho, &weight_or_unit(&rs));
        assert!(rs.is_regular(&regular));
        assert_eq!(rs.weyl_orbit(&regular).len(), rs.weyl_order());
        assert_eq!(rs.orbit_volumes(&regular).unwrap().symplectic, rs.vol_poly().eval(&regular));
        assert_eq!(rs.weyl_orbit(&exact::zeros(rs.rank)).len(), 1);
    }
    // A2 singular weight: orbit of size 3, real dimension 4
    let rs = a2();
    let v = rs.orbit_volumes(&qv(&[1, 0])).unwrap();
    assert_eq!(rs.weyl_orbit(&qv(&[1, 0])).len(), 3);
    assert_eq!(v.half_dim, 2);
}

fn weight_or_unit(rs: &RootSystem) -> Vec<Q> {
    if rs.rank == 1 {
        vec![q(1)]
    } else {
        weight(rs, 1, 2)
    }
}

#[test]
fn non_dominant_is_rejected() {
    assert!(a2().dim_irrep(&qv(&[-1, 2])).is_err());
    assert!(a2().dim_irrep(&qv(&[1])).is_err());
}

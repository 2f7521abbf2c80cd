use gkl::geometry::*;
use gkl::jets::C64;
use gkl::sampling::{gaussian_pairs, haar_unitary, rng_for};
use gkl::superalg::{HomMatrix, Multivector, Vars};

fn shapes() -> Vec<Shape> {
    vec![Shape::new(1, 2).unwrap(), Shape::new(1, 3).unwrap(), Shape::new(2, 4).unwrap()]
}

fn nabla(m: &Multivector, eta: &[gkl::jets::Jet]) -> Multivector {
    m.delta_eta(eta).sub(&m.dbar(Vars::Both).unwrap())
}

#[test]
fn delta_sigma_is_one() {
    for shape in shapes() {
        for pair in gaussian_pairs(shape, 11, 20) {
            let s = Seeded::new(shape, &pair, 2);
            let d = sigma(&s).unwrap().delta_eta(&eta(&s));
            let res = d.sub(&Multivector::one(shape.n())).max_value();
            assert!(res < 1e-10, "{shape:?}: {res}");
        }
    }
}

#[test]
fn weight_g_is_nabla_closed() {
    for shape in shapes() {
        for pair in gaussian_pairs(shape, 12, 20) {
            let s = Seeded::new(shape, &pair, 2);
            let g = weight_g(&s).unwrap();
            let e = eta(&s);
            for entry in g.entries() {
                let res = nabla(entry, &e).max_value();
                assert!(res < 1e-9, "{shape:?}: {res}");
            }
        }
    }
}

#[test]
fn closed_form_connections_match_generic() {
    for shape in shapes() {
        for pair in gaussian_pairs(shape, 13, 5) {
            let s = Seeded::new(shape, &pair, 2);
            for b in [Bundle::H(Side::Z), Bundle::F(Side::Z), Bundle::HDual(Side::W), Bundle::F(Side::W), Bundle::E] {
                let closed = connection(&s, b).unwrap().map_coeff(|c| c.value());
                let generic = connection_generic(&s, b).unwrap().map_coeff(|c| c.value());
                let res = closed.sub(&generic).unwrap().max_magnitude();
                assert!(res < 1e-12, "{shape:?} {b:?}: {res}");
            }
        }
    }
}

#[test]
fn invariance_of_gamma_sigma_eta() {
    for shape in shapes() {
        let pairs = gaussian_pairs(shape, 14, 10);
        for (i, pair) in pairs.iter().enumerate() {
            let l = haar_unitary(shape.big_n, &mut rng_for(99, i as u64));
            let t = PairTransition::new(shape, &l, pair).unwrap();
            let s = Seeded::new(shape, pair, 2);
            let sp = Seeded::new(shape, &t.image(), 2);
            let nrm = eta_norm_sq(&s).unwrap();
            let nrmp = eta_norm_sq(&sp).unwrap();
            assert!((nrm - nrmp).abs() < 1e-10 * nrm, "{shape:?} eta norm {nrm} {nrmp}");
            let g = weight_g(&s).unwrap().map_coeff(|c| c.value());
            let gp = t.pull_hom(&weight_g(&sp).unwrap().map_coeff(|c| c.value()));
            let res = g.sub(&gp).unwrap().max_magnitude();
            assert!(res < 1e-9 * (1.0 + g.max_magnitude()), "{shape:?} G: {res}");
            let sg = sigma(&s).unwrap().values();
            let sgp = sigma(&sp).unwrap().values().substitute(&t.pullback_maps());
            let res = sg.sub(&sgp).max_value();
            assert!(res < 1e-9 * (1.0 + sg.max_value()), "{shape:?} sigma: {res}");
        }
    }
}

#[test]
fn curvature_at_origin() {
    let shape = Shape::new(1, 2).unwrap();
    let pair = PointPair::new(ChartMatrix::zeros(shape), ChartMatrix::zeros(shape));
    let s = Seeded::new(shape, &pair, 2);
    let n = 1;
    let dz = Multivector::<C64>::generator(n, gkl::superalg::GenKind::Dz, 0);
    let dzb = Multivector::<C64>::generator(n, gkl::superalg::GenKind::DzBar, 0);
    let dw = Multivector::<C64>::generator(n, gkl::superalg::GenKind::Dw, 0);
    let dwb = Multivector::<C64>::generator(n, gkl::superalg::GenKind::DwBar, 0);
    let tf = curvature(&s, Bundle::F(Side::Z)).unwrap().map_coeff(|c| c.value());
    assert_eq!(tf, HomMatrix::scalar(dz.wedge(&dzb)));
    let th = curvature(&s, Bundle::H(Side::W)).unwrap().map_coeff(|c| c.value());
    assert_eq!(th, HomMatrix::scalar(dw.wedge(&dwb).neg()));
}

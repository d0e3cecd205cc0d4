#![allow(dead_code)]

use std::f64::consts::TAU;

use semidae::{Region, SystemDef};

/// ẍ = -x + y - ẋ with y³ + y = x².
pub fn cubic_oscillator() -> SystemDef {
    SystemDef::from_strs(
        2,
        1,
        TAU,
        &["x2", "-x1 + y1 - x2"],
        &["y1^3 + y1 - x1^2"],
        &[],
        Region::cube(3, 2.0),
    )
    .unwrap()
}

/// ẋ = -y, x = y³/3 - y, forced by -sin t.
pub fn lienard() -> SystemDef {
    SystemDef::from_strs(
        1,
        1,
        TAU,
        &["-y1"],
        &["x1 - y1^3/3 + y1"],
        &["-sin(t)"],
        Region::from_bounds(&[(-2.0, 2.0), (-0.95, 0.95)]).unwrap(),
    )
    .unwrap()
}

/// Two zeros, (0,0) degenerate and (1,1) regular; forced by cos t.
pub fn two_zeros() -> SystemDef {
    SystemDef::from_strs(
        1,
        1,
        TAU,
        &["y1^2 - x1*y1"],
        &["y1 - x1^2"],
        &["cos(t)"],
        Region::cube(2, 2.0),
    )
    .unwrap()
}

/// Constraint x = y³, singular along y = 0.
pub fn cusp() -> SystemDef {
    SystemDef::from_strs(1, 1, TAU, &["1"], &["x1 - y1^3"], &[], Region::cube(2, 1.0)).unwrap()
}

/// Constraint on the unit circle.
pub fn circle() -> SystemDef {
    SystemDef::from_strs(1, 1, TAU, &["y1"], &["x1^2 + y1^2 - 1"], &[], Region::cube(2, 2.0)).unwrap()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
}

/// Degree of a field on a 3-box from the total solid angle swept by its
/// normalized boundary image, on an `m × m` mesh per face.
pub fn solid_angle_degree(field: &dyn semidae::field::VectorField, region: &Region, m: usize) -> i64 {
    let (lo, hi) = (region.lower(), region.upper());
    let unit = |z: [f64; 3]| {
        let v = field.eval(&z).unwrap();
        let n = v.norm();
        assert!(n > 1e-9, "field vanishes on the boundary at {z:?}");
        [v[0] / n, v[1] / n, v[2] / n]
    };
    let mut total = 0.0;
    for axis in 0..3 {
        let (u, w) = ((axis + 1) % 3, (axis + 2) % 3);
        for (side, outward) in [(lo[axis], -1.0), (hi[axis], 1.0)] {
            let at = |i: usize, j: usize| {
                let mut z = [0.0; 3];
                z[axis] = side;
                z[u] = lo[u] + (hi[u] - lo[u]) * i as f64 / m as f64;
                z[w] = lo[w] + (hi[w] - lo[w]) * j as f64 / m as f64;
                z
            };
            for i in 0..m {
                for j in 0..m {
                    let (a, b, c, d) = (at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
                    // (e_u, e_w, e_axis) is right-handed, so u→w order faces +axis.
                    let tris = if outward > 0.0 {
                        [[a, b, c], [a, c, d]]
                    } else {
                        [[a, c, b], [a, d, c]]
                    };
                    for t in tris {
                        total += triangle_solid_angle(unit(t[0]), unit(t[1]), unit(t[2]));
                    }
                }
            }
        }
    }
    (total / (4.0 * std::f64::consts::PI)).round() as i64
}

fn triangle_solid_angle(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    let dot = |x: [f64; 3], y: [f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
    let cross = [
        b[1] * c[2] - b[2] * c[1],
        b[2] * c[0] - b[0] * c[2],
        b[0] * c[1] - b[1] * c[0],
    ];
    let num = dot(a, cross);
    let den = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    2.0 * num.atan2(den)
}

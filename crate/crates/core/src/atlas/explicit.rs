//! Closed-form curl eigenbases of the round S^3 for eigenvalues 2..5, stored
//! with rational coefficients in the Hopf frame. Squared L2 norms are kept as
//! rational multiples of pi^2.

use crate::exact::{ratio, Rational};
use crate::frame::FrameField;

// (f1, f2, f3, |e|^2 / pi^2 as (p, q))
type Row = (&'static str, &'static str, &'static str, (i64, i64));

const E3: [Row; 8] = [
    ("0", "x1", "-x2", (1, 1)),
    ("0", "x2", "x1", (1, 1)),
    ("0", "x3", "-x4", (1, 1)),
    ("0", "x4", "x3", (1, 1)),
    ("-2*x2", "x3", "x4", (3, 1)),
    ("2*x1", "-x4", "x3", (3, 1)),
    ("2*x3", "x2", "-x1", (3, 1)),
    ("2*x4", "x1", "x2", (3, 1)),
];

const E4: [Row; 15] = [
    ("0", "x1^2 - x2^2", "-2*x1*x2", (2, 3)),
    ("0", "x3^2 - x4^2", "-2*x3*x4", (2, 3)),
    ("0", "2*x1*x2", "x1^2 - x2^2", (2, 3)),
    ("0", "2*x3*x4", "x3^2 - x4^2", (2, 3)),
    ("0", "x2*x4 - x1*x3", "x1*x4 + x2*x3", (1, 3)),
    ("0", "x1*x4 + x2*x3", "x1*x3 - x2*x4", (1, 3)),
    ("x1*x2 + x3*x4", "0", "x2*x3 - x1*x4", (1, 3)),
    ("8*x1*x3", "2*(x1*x2 - x3*x4)", "3*(x3^2 - x1^2) + x4^2 - x2^2", (28, 3)),
    ("4*(x1*x4 - x2*x3)", "x1^2 - x2^2 + x3^2 - x4^2", "2*(x1*x2 + x3*x4)", (4, 1)),
    ("14*x2*x4 + 2*x1*x3", "4*(x1*x2 - x3*x4)", "x1^2 - x3^2 + 5*(x2^2 - x4^2)", (28, 1)),
    ("2*(x1^2 - x3^2)", "-(x1*x4 + x2*x3)", "3*x1*x3 + x2*x4", (7, 3)),
    ("7*(x2^2 - x4^2) + x1^2 - x3^2", "-4*(x1*x4 + x2*x3)", "-(2*x1*x3 + 10*x2*x4)", (28, 1)),
    ("x3*x4 - x1*x2", "x1*x3 + x2*x4", "0", (1, 3)),
    ("2*(x1*x4 + x2*x3)", "x1^2 - x4^2 + x2^2 - x3^2", "0", (4, 3)),
    ("x2^2 - x3^2 + x4^2 - x1^2", "2*(x1*x4 - x2*x3)", "0", (4, 3)),
];

/// Eigenvalue-5 fields: `sign * base + sum r_j e_j` over earlier entries.
/// Base coefficients use x, y, z, w for x1..x4.
struct E5Row {
    base: (&'static str, &'static str, &'static str),
    sign: i64,
    corrections: &'static [((i64, i64), usize)],
    norm: (i64, i64),
}

const fn r(
    base: (&'static str, &'static str, &'static str),
    sign: i64,
    corrections: &'static [((i64, i64), usize)],
    norm: (i64, i64),
) -> E5Row {
    E5Row { base, sign, corrections, norm }
}

const E5: [E5Row; 24] = [
    r(("0", "x*z^2 - x*w^2 - 2*y*z*w", "w^2*y - z^2*y - 2*x*z*w"), 1, &[], (1, 6)),
    r(("0", "3*x*y^2 - x^3", "3*x^2*y - y^3"), 1, &[], (1, 2)),
    r(("0", "y^3 - 3*x^2*y", "3*x*y^2 - x^3"), 1, &[], (1, 2)),
    r(("0", "y*z^2 + 2*x*z*w - w^2*y", "x*z^2 - x*w^2 - 2*w*y*z"), 1, &[], (1, 6)),
    r(("0", "y^2*w - 2*x*y*z - x^2*w", "y^2*z - x^2*z + 2*x*y*w"), 1, &[], (1, 6)),
    r(("0", "3*z^2*w - w^3", "z^3 - 3*w^2*z"), 1, &[], (1, 2)),
    r(("0", "x^2*z - y^2*z - 2*x*y*w", "y^2*w - x^2*w - 2*x*y*z"), 1, &[], (1, 6)),
    r(("0", "z^3 - 3*w^2*z", "w^3 - 3*z^2*w"), 1, &[], (1, 2)),
    r(("x^3 - 3*x*w^2", "w^3 - 3*x^2*w", "0"), 1, &[((-3, 8), 5), ((1, 8), 6)], (15, 32)),
    r(("x^2*y - 2*x*z*w - w^2*y", "w^2*z - 2*x*y*w - x^2*z", "0"), 1, &[((-1, 8), 7), ((1, 8), 8)], (5, 32)),
    r(("x^2*z + 2*x*y*w - w^2*z", "x^2*y - 2*x*z*w - w^2*y", "0"), 1, &[((1, 8), 3), ((1, 8), 4)], (5, 32)),
    r(("x*y^2 - x*z^2 - 2*w*y*z", "w*z^2 - w*y^2 - 2*x*y*z", "0"), 1, &[((-1, 8), 5), ((-1, 8), 6)], (5, 32)),
    r(("y^2*w - z^2*w + 2*x*y*z", "x*y^2 - x*z^2 - 2*y*z*w", "0"), 1, &[((-1, 8), 1), ((-1, 8), 2)], (5, 32)),
    r(("3*y^2*z - z^3", "y^3 - 3*y*z^2", "0"), -1, &[((1, 8), 3), ((-3, 8), 4)], (15, 32)),
    r(("3*y*z^2 - y^3", "3*y^2*z - z^3", "0"), 1, &[((3, 8), 7), ((1, 8), 8)], (15, 32)),
    r(("3*x^2*w - w^3", "x^3 - 3*x*w^2", "0"), -1, &[((3, 8), 1), ((-1, 8), 2)], (15, 32)),
    r(
        ("w^2*z + 2*x*y*w - y^2*z", "0", "x*y^2 - x*w^2 + 2*w*y*z"),
        -1,
        &[((1, 8), 3), ((-1, 8), 4), ((1, 6), 11), ((1, 6), 14)],
        (5, 36),
    ),
    r(("3*x^2*z - z^3", "0", "3*x*z^2 - x^3"), 1, &[((-1, 8), 3), ((-3, 8), 4), ((-1, 2), 11), ((1, 6), 14)], (5, 12)),
    r(
        ("x*y^2 - x*w^2 + 2*w*y*z", "0", "y^2*z - 2*x*y*w - w^2*z"),
        1,
        &[((1, 8), 5), ((-1, 8), 6), ((-1, 6), 9), ((1, 6), 12)],
        (5, 36),
    ),
    r(
        ("z^2*w + 2*x*y*z - x^2*w", "0", "y*z^2 - x^2*y - 2*x*z*w"),
        -1,
        &[((1, 8), 1), ((-1, 8), 2), ((1, 6), 13), ((1, 6), 16)],
        (5, 36),
    ),
    r(("3*w^2*y - y^3", "0", "3*y^2*w - w^3"), -1, &[((3, 8), 7), ((-1, 8), 8), ((-1, 2), 10), ((1, 6), 15)], (5, 12)),
    r(("3*x*z^2 - x^3", "0", "z^3 - 3*x^2*z"), 1, &[((-3, 8), 5), ((-1, 8), 6), ((1, 6), 9), ((1, 2), 12)], (5, 12)),
    r(
        ("y*z^2 - x^2*y - 2*x*z*w", "0", "x^2*w - w*z^2 - 2*x*y*z"),
        -1,
        &[((1, 8), 7), ((1, 8), 8), ((1, 6), 10), ((1, 6), 15)],
        (5, 36),
    ),
    r(("3*y^2*w - w^3", "0", "y^3 - 3*w^2*y"), 1, &[((3, 8), 1), ((1, 8), 2), ((-1, 2), 13), ((1, 6), 16)], (5, 12)),
];

fn field(f1: &str, f2: &str, f3: &str) -> FrameField {
    FrameField::parse(f1, f2, f3).expect("static basis table parses")
}

fn from_rows(rows: &[Row]) -> (Vec<FrameField>, Vec<Rational>) {
    rows.iter().map(|(a, b, c, (p, q))| (field(a, b, c), ratio(*p, *q))).unzip()
}

/// u1..u8: eigenvalue 3.
pub fn e3() -> (Vec<FrameField>, Vec<Rational>) {
    from_rows(&E3)
}

/// v1..v15: eigenvalue 4.
pub fn e4() -> (Vec<FrameField>, Vec<Rational>) {
    from_rows(&E4)
}

/// w1..w24: eigenvalue 5. Fields 1-8 have no B1 component, 9-16 no B3
/// component, 17-24 no B2 component (before corrections).
pub fn e5() -> (Vec<FrameField>, Vec<Rational>) {
    let mut fields: Vec<FrameField> = Vec::with_capacity(24);
    let mut norms = Vec::with_capacity(24);
    for row in &E5 {
        let (a, b, c) = row.base;
        let mut e = field(a, b, c).scale(&Rational::from_integer(row.sign.into()));
        for &((p, q), j) in row.corrections {
            e = &e + &fields[j - 1].scale(&ratio(p, q));
        }
        fields.push(e);
        norms.push(ratio(row.norm.0, row.norm.1));
    }
    (fields, norms)
}

/// B1, B2, B3: eigenvalue 2, each of squared norm 2 pi^2.
pub fn e2() -> (Vec<FrameField>, Vec<Rational>) {
    ((0..3).map(FrameField::basis).collect(), vec![ratio(2, 1); 3])
}

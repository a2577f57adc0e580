//! Mosaics: `a x b` arrays of ruled components glued along axes.
//!
//! Rows `i = 1..=a` are counted from the bottom and columns `j = 1..=b`
//! from the right. Column 1 holds `F1` components, every other column
//! `F0` components. Horizontal axes `A_0..A_a` and vertical axes
//! `B_0..B_b` cut into subaxes, one per adjacent component:
//!
//! * `A_{i,j}` is the piece of `A_i` in column `j` (`0 <= i <= a`);
//! * `B_{i,j}` is the piece of `B_j` in row `i` (`0 <= j <= b`).
//!
//! A bundle `(u x v): m` restricts to `((u_1 - sum_{k<i} v_k) x v_i)_1` on
//! `S_{i,1}` and to `(u_j x v_i)_0` on `S_{i,j}`, `j > 1`, with the point
//! multiplicities `m_{ijk}` on the component's own exceptional classes.
//!
//! Subaxis classes inside a component: in `F1` the bottom side is a line
//! section `(1:0)`, the top side the exceptional section `(0:-1)` and the
//! vertical sides fibres `(1:1)`; in `F0` horizontal sides are `(0 x 1)`
//! and vertical sides `(1 x 0)`.
//!
//! Canonical text form of the point layout: `AxB:(r_11,..,r_1b)(r_21,..)..`,
//! rows bottom to top, each row listed from column 1 (rightmost).

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::picard::{RuledClass, Surface};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mosaic {
    a: usize,
    b: usize,
    points: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Horizontal,
    Vertical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Bottom,
    Top,
    Right,
    Left,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SubaxisId {
    /// Piece of `A_row` in column `col`.
    Horizontal { row: usize, col: usize },
    /// Piece of `B_col` in row `row`.
    Vertical { row: usize, col: usize },
}

impl fmt::Display for SubaxisId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubaxisId::Horizontal { row, col } => write!(f, "A_{{{row},{col}}}"),
            SubaxisId::Vertical { row, col } => write!(f, "B_{{{row},{col}}}"),
        }
    }
}

/// 1-based `(row, column)` of a component.
pub type Component = (usize, usize);

impl Mosaic {
    /// `points[i-1][j-1]` is the number of blown-up points on `S_{i,j}`.
    pub fn new(points: Vec<Vec<usize>>) -> Result<Self> {
        let a = points.len();
        let b = points.first().map_or(0, Vec::len);
        if a == 0 || b == 0 {
            return Err(Error::InvalidArgument("a mosaic needs at least one component".into()));
        }
        if let Some(row) = points.iter().position(|r| r.len() != b) {
            return Err(Error::InvalidArgument(format!(
                "row {} has {} columns, expected {b}",
                row + 1,
                points[row].len()
            )));
        }
        Ok(Self { a, b, points })
    }

    pub fn empty(a: usize, b: usize) -> Result<Self> {
        Self::new(vec![vec![0; b]; a])
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn points(&self) -> &[Vec<usize>] {
        &self.points
    }

    pub fn total_points(&self) -> usize {
        self.points.iter().flatten().sum()
    }

    fn check_component(&self, (i, j): Component) -> Result<()> {
        if i == 0 || i > self.a || j == 0 || j > self.b {
            return Err(Error::OutOfRange(format!(
                "component ({i}, {j}) in a {}x{} mosaic",
                self.a, self.b
            )));
        }
        Ok(())
    }

    pub fn r(&self, i: usize, j: usize) -> Result<usize> {
        self.check_component((i, j))?;
        Ok(self.points[i - 1][j - 1])
    }

    pub fn surface(&self, j: usize) -> Surface {
        if j == 1 {
            Surface::F1
        } else {
            Surface::F0
        }
    }

    pub fn components(&self) -> impl Iterator<Item = Component> + '_ {
        (1..=self.a).flat_map(move |i| (1..=self.b).map(move |j| (i, j)))
    }

    pub fn check_subaxis(&self, axis: SubaxisId) -> Result<()> {
        let ok = match axis {
            SubaxisId::Horizontal { row, col } => row <= self.a && (1..=self.b).contains(&col),
            SubaxisId::Vertical { row, col } => (1..=self.a).contains(&row) && col <= self.b,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::OutOfRange(format!(
                "no subaxis {axis} in a {}x{} mosaic",
                self.a, self.b
            )))
        }
    }

    pub fn is_interior(&self, axis: SubaxisId) -> bool {
        match axis {
            SubaxisId::Horizontal { row, .. } => row >= 1 && row < self.a,
            SubaxisId::Vertical { col, .. } => col >= 1 && col < self.b,
        }
    }

    /// Every subaxis, horizontal ones first, in row-major order.
    pub fn subaxes(&self) -> Vec<SubaxisId> {
        let mut out = Vec::new();
        for row in 0..=self.a {
            for col in 1..=self.b {
                out.push(SubaxisId::Horizontal { row, col });
            }
        }
        for row in 1..=self.a {
            for col in 0..=self.b {
                out.push(SubaxisId::Vertical { row, col });
            }
        }
        out
    }

    pub fn interior_subaxes(&self) -> Vec<SubaxisId> {
        self.subaxes()
            .into_iter()
            .filter(|&x| self.is_interior(x))
            .collect()
    }

    /// The four sides of `S_{i,j}`.
    pub fn sides(&self, (i, j): Component) -> [(SubaxisId, Side); 4] {
        [
            (SubaxisId::Horizontal { row: i - 1, col: j }, Side::Bottom),
            (SubaxisId::Horizontal { row: i, col: j }, Side::Top),
            (SubaxisId::Vertical { row: i, col: j - 1 }, Side::Right),
            (SubaxisId::Vertical { row: i, col: j }, Side::Left),
        ]
    }

    /// Components containing the subaxis, with the side it forms.
    pub fn adjacent(&self, axis: SubaxisId) -> Vec<(Component, Side)> {
        let mut out = Vec::new();
        match axis {
            SubaxisId::Horizontal { row, col } => {
                if row >= 1 {
                    out.push(((row, col), Side::Top));
                }
                if row < self.a {
                    out.push(((row + 1, col), Side::Bottom));
                }
            }
            SubaxisId::Vertical { row, col } => {
                if col >= 1 {
                    out.push(((row, col), Side::Left));
                }
                if col < self.b {
                    out.push(((row, col + 1), Side::Right));
                }
            }
        }
        out
    }

    /// The subaxis class of one side of `S_{i,j}`, on that component's
    /// blowup.
    pub fn subaxis_class(&self, c: Component, side: Side) -> Result<RuledClass> {
        let n = self.r(c.0, c.1)?;
        let zeros = vec![BigInt::zero(); n];
        Ok(match (self.surface(c.1), side) {
            (Surface::F1, Side::Bottom) => RuledClass::f1(1, 0, zeros),
            (Surface::F1, Side::Top) => RuledClass::f1(0, -1, zeros),
            (Surface::F1, _) => RuledClass::f1(1, 1, zeros),
            (Surface::F0, Side::Bottom | Side::Top) => RuledClass::f0(0, 1, zeros),
            (Surface::F0, _) => RuledClass::f0(1, 0, zeros),
        })
    }

    /// Adds a column on the left (horizontal) or a row at the bottom
    /// (vertical), with no points.
    pub fn extend(&self, dir: Direction) -> Mosaic {
        let mut points = self.points.clone();
        match dir {
            Direction::Horizontal => points.iter_mut().for_each(|r| r.push(0)),
            Direction::Vertical => points.insert(0, vec![0; self.b]),
        }
        Mosaic::new(points).expect("extension keeps the shape rectangular")
    }
}

impl fmt::Display for Mosaic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}:", self.a, self.b)?;
        for row in &self.points {
            let cells: Vec<String> = row.iter().map(usize::to_string).collect();
            write!(f, "({})", cells.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for Mosaic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = |msg: &str| Error::Parse {
            pos: 0,
            msg: format!("{msg} in mosaic {s:?}"),
        };
        let (shape, rows) = s.split_once(':').ok_or_else(|| bad("missing ':'"))?;
        let (a, b) = shape
            .split_once(['x', 'X', '×'])
            .ok_or_else(|| bad("missing 'x'"))?;
        let a: usize = a.parse().map_err(|_| bad("bad row count"))?;
        let b: usize = b.parse().map_err(|_| bad("bad column count"))?;
        let rows = rows
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| bad("rows must be parenthesised"))?;
        let points = rows
            .split(")(")
            .map(|row| {
                row.split(',')
                    .map(|x| x.parse::<usize>().map_err(|_| bad("bad point count")))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let m = Mosaic::new(points)?;
        if m.a != a || m.b != b {
            return Err(bad("declared shape does not match rows"));
        }
        Ok(m)
    }
}

/// The bundle `(u x v): m`: `u` has one entry per column, `v` one per row,
/// and `m[i-1][j-1]` lists the multiplicities at the points of `S_{i,j}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MosaicBundle {
    pub u: Vec<i64>,
    pub v: Vec<i64>,
    pub m: Vec<Vec<Vec<i64>>>,
}

impl MosaicBundle {
    /// Bundle with every point multiplicity zero.
    pub fn without_points(mosaic: &Mosaic, u: Vec<i64>, v: Vec<i64>) -> Self {
        Self::uniform(mosaic, u, v, 0)
    }

    /// Bundle with the same multiplicity at every point.
    pub fn uniform(mosaic: &Mosaic, u: Vec<i64>, v: Vec<i64>, mult: i64) -> Self {
        let m = mosaic
            .points
            .iter()
            .map(|row| row.iter().map(|&n| vec![mult; n]).collect())
            .collect();
        Self { u, v, m }
    }

    pub fn validate(&self, mosaic: &Mosaic) -> Result<()> {
        if self.u.len() != mosaic.b {
            return Err(Error::Dimension {
                left: self.u.len(),
                right: mosaic.b,
            });
        }
        if self.v.len() != mosaic.a {
            return Err(Error::Dimension {
                left: self.v.len(),
                right: mosaic.a,
            });
        }
        let shape_ok = self.m.len() == mosaic.a
            && self.m.iter().zip(&mosaic.points).all(|(mr, pr)| {
                mr.len() == pr.len() && mr.iter().zip(pr).all(|(ms, &n)| ms.len() == n)
            });
        if !shape_ok {
            return Err(Error::InvalidArgument(
                "multiplicity array does not match the point counts".into(),
            ));
        }
        Ok(())
    }

    fn mults(&self, (i, j): Component) -> Vec<BigInt> {
        self.m[i - 1][j - 1].iter().map(|&x| BigInt::from(x)).collect()
    }
}

fn big(x: i64) -> BigInt {
    BigInt::from(x)
}

/// `L|S_{i,j}`.
pub fn restrict(mosaic: &Mosaic, l: &MosaicBundle, i: usize, j: usize) -> Result<RuledClass> {
    l.validate(mosaic)?;
    mosaic.check_component((i, j))?;
    let mults = l.mults((i, j));
    let v = big(l.v[i - 1]);
    if j == 1 {
        let below: i64 = l.v[..i - 1].iter().sum();
        Ok(RuledClass::f1_product(big(l.u[0] - below), v, mults))
    } else {
        Ok(RuledClass::f0(big(l.u[j - 1]), v, mults))
    }
}

/// Degree of `L` on a subaxis: `u_j` on horizontal pieces off column 1,
/// `u_1 - sum_{k<=i} v_k` on `A_{i,1}`, and `v_i` on `B_{i,j}`.
pub fn restrict_axis(mosaic: &Mosaic, l: &MosaicBundle, axis: SubaxisId) -> Result<BigInt> {
    l.validate(mosaic)?;
    mosaic.check_subaxis(axis)?;
    Ok(match axis {
        SubaxisId::Horizontal { row, col: 1 } => big(l.u[0] - l.v[..row].iter().sum::<i64>()),
        SubaxisId::Horizontal { col, .. } => big(l.u[col - 1]),
        SubaxisId::Vertical { row, .. } => big(l.v[row - 1]),
    })
}

/// `((u_1+..+u_b) x (v_1+..+v_a) : all m)_1`, multiplicities in row-major
/// order.
pub fn general_fibre(mosaic: &Mosaic, l: &MosaicBundle) -> Result<RuledClass> {
    l.validate(mosaic)?;
    let mults = l.m.iter().flatten().flatten().map(|&x| big(x)).collect();
    Ok(RuledClass::f1_product(
        big(l.u.iter().sum()),
        big(l.v.iter().sum()),
        mults,
    ))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConservationReport {
    #[serde(with = "crate::picard::bigint_serde")]
    pub sum_self_int: BigInt,
    #[serde(with = "crate::picard::bigint_serde")]
    pub gen_self_int: BigInt,
    #[serde(with = "crate::picard::bigint_serde")]
    pub sum_adjoint: BigInt,
    #[serde(with = "crate::picard::bigint_serde")]
    pub gen_adjoint: BigInt,
}

impl ConservationReport {
    pub fn holds(&self) -> bool {
        self.sum_self_int == self.gen_self_int && self.sum_adjoint == self.gen_adjoint
    }
}

/// Compares `sum (L|S)^2` with `L_gen^2`, and `sum (K_S + D_S).L|S` with
/// `K.L_gen`, where `D_S` is the sum of the interior subaxes of `S`.
pub fn conservation_report(mosaic: &Mosaic, l: &MosaicBundle) -> Result<ConservationReport> {
    let gen = general_fibre(mosaic, l)?;
    let mut sum_self_int = BigInt::zero();
    let mut sum_adjoint = BigInt::zero();
    for c in mosaic.components() {
        let piece = restrict(mosaic, l, c.0, c.1)?;
        sum_self_int += piece.self_intersection();
        sum_adjoint -= piece.anticanonical_degree();
        for (axis, _) in mosaic.sides(c) {
            if mosaic.is_interior(axis) {
                sum_adjoint += restrict_axis(mosaic, l, axis)?;
            }
        }
    }
    Ok(ConservationReport {
        sum_self_int,
        gen_self_int: gen.self_intersection(),
        sum_adjoint,
        gen_adjoint: -gen.anticanonical_degree(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxisCheck {
    pub axis: SubaxisId,
    #[serde(with = "crate::picard::bigint_serde")]
    pub expected: BigInt,
    /// `(component, L|S . subaxis class)` for each adjacent component.
    #[serde(with = "sides_serde")]
    pub sides: Vec<(Component, BigInt)>,
}

mod sides_serde {
    use super::Component;
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Side {
        component: Component,
        #[serde(with = "crate::picard::bigint_serde")]
        degree: BigInt,
    }

    pub fn serialize<S: Serializer>(v: &[(Component, BigInt)], s: S) -> Result<S::Ok, S::Error> {
        let reprs: Vec<Side> = v
            .iter()
            .map(|(c, d)| Side { component: *c, degree: d.clone() })
            .collect();
        reprs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(Component, BigInt)>, D::Error> {
        Ok(Vec::<Side>::deserialize(d)?
            .into_iter()
            .map(|s| (s.component, s.degree))
            .collect())
    }
}

impl AxisCheck {
    pub fn consistent(&self) -> bool {
        self.sides.iter().all(|(_, d)| *d == self.expected)
    }
}

/// For every subaxis, the degree of each adjacent restriction on it.
pub fn axis_consistency(mosaic: &Mosaic, l: &MosaicBundle) -> Result<Vec<AxisCheck>> {
    mosaic
        .subaxes()
        .into_iter()
        .map(|axis| {
            let sides = mosaic
                .adjacent(axis)
                .into_iter()
                .map(|(c, side)| {
                    let piece = restrict(mosaic, l, c.0, c.1)?;
                    let class = mosaic.subaxis_class(c, side)?;
                    Ok((c, piece.intersect(&class)?))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(AxisCheck {
                axis,
                expected: restrict_axis(mosaic, l, axis)?,
                sides,
            })
        })
        .collect()
}

/// Bundle on the extended mosaic: a horizontal extension appends `entry`
/// to `u` (new left column), a vertical one prepends it to `v` (new bottom
/// row). New components carry no points.
pub fn extend_bundle(l: &MosaicBundle, dir: Direction, entry: i64) -> MosaicBundle {
    let mut out = l.clone();
    match dir {
        Direction::Horizontal => {
            out.u.push(entry);
            out.m.iter_mut().for_each(|row| row.push(Vec::new()));
        }
        Direction::Vertical => {
            out.v.insert(0, entry);
            out.m.insert(0, vec![Vec::new(); l.u.len()]);
        }
    }
    out
}

/// A mosaic with a bundle on it. JSON shape:
/// `{"a", "b", "points": [[..]], "u": [..], "v": [..], "m": [[[..]]]}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MosaicData {
    pub mosaic: Mosaic,
    pub bundle: MosaicBundle,
}

#[derive(Serialize, Deserialize)]
struct MosaicRepr {
    a: usize,
    b: usize,
    points: Vec<Vec<usize>>,
    u: Vec<i64>,
    v: Vec<i64>,
    m: Vec<Vec<Vec<i64>>>,
}

impl MosaicData {
    pub fn new(mosaic: Mosaic, bundle: MosaicBundle) -> Result<Self> {
        bundle.validate(&mosaic)?;
        Ok(Self { mosaic, bundle })
    }
}

impl Serialize for MosaicData {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MosaicRepr {
            a: self.mosaic.a,
            b: self.mosaic.b,
            points: self.mosaic.points.clone(),
            u: self.bundle.u.clone(),
            v: self.bundle.v.clone(),
            m: self.bundle.m.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MosaicData {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = MosaicRepr::deserialize(d)?;
        let mosaic = Mosaic::new(r.points).map_err(D::Error::custom)?;
        if mosaic.a != r.a || mosaic.b != r.b {
            return Err(D::Error::custom(format!(
                "declared shape {}x{} does not match points {}x{}",
                r.a, r.b, mosaic.a, mosaic.b
            )));
        }
        let bundle = MosaicBundle {
            u: r.u,
            v: r.v,
            m: r.m,
        };
        MosaicData::new(mosaic, bundle).map_err(D::Error::custom)
    }
}

/// Declared intersection degree of one component's part of a cycle with
/// one of its subaxes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contact {
    pub axis: SubaxisId,
    pub component: Component,
    pub degree: i64,
}

/// A limit cycle `Z = sum Z_{ij}` with optional declared contact data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateCycle {
    /// `components[i-1][j-1]` is `Z_{ij}`.
    pub components: Vec<Vec<RuledClass>>,
    #[serde(default)]
    pub contacts: Vec<Contact>,
}

impl CandidateCycle {
    pub fn zero(mosaic: &Mosaic) -> Self {
        let components = mosaic
            .points
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(j, &n)| RuledClass::zero(mosaic.surface(j + 1), n))
                    .collect()
            })
            .collect();
        Self {
            components,
            contacts: Vec::new(),
        }
    }

    fn component(&self, (i, j): Component) -> &RuledClass {
        &self.components[i - 1][j - 1]
    }

    fn validate(&self, mosaic: &Mosaic) -> Result<()> {
        if self.components.len() != mosaic.a
            || self.components.iter().any(|r| r.len() != mosaic.b)
        {
            return Err(Error::InvalidArgument(format!(
                "cycle shape does not match a {}x{} mosaic",
                mosaic.a, mosaic.b
            )));
        }
        for c in mosaic.components() {
            let z = self.component(c);
            if z.surface() != mosaic.surface(c.1) {
                return Err(Error::InvalidArgument(format!(
                    "component {c:?} must be on {:?}",
                    mosaic.surface(c.1)
                )));
            }
            if z.n_points() != mosaic.r(c.0, c.1)? {
                return Err(Error::Dimension {
                    left: z.n_points(),
                    right: mosaic.r(c.0, c.1)?,
                });
            }
        }
        for ct in &self.contacts {
            mosaic.check_subaxis(ct.axis)?;
            if !mosaic.adjacent(ct.axis).iter().any(|(c, _)| *c == ct.component) {
                return Err(Error::InvalidArgument(format!(
                    "component {:?} does not contain {}",
                    ct.component, ct.axis
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GoodnessFailure {
    /// The component meets the subaxis negatively, so it contains it.
    ContainsSubaxis {
        axis: SubaxisId,
        component: Component,
        #[serde(with = "crate::picard::bigint_serde")]
        degree: BigInt,
    },
    /// Declared contact differs from the component class's intersection
    /// number with the subaxis.
    ContactMismatch {
        axis: SubaxisId,
        component: Component,
        declared: i64,
        #[serde(with = "crate::picard::bigint_serde")]
        computed: BigInt,
    },
    /// The two sides of an interior subaxis meet it in different degrees.
    Matching {
        axis: SubaxisId,
        #[serde(with = "sides_serde")]
        degrees: Vec<(Component, BigInt)>,
    },
    /// Row sums across an interior horizontal axis differ.
    HorizontalMatching {
        row: usize,
        #[serde(with = "crate::picard::bigint_serde")]
        below: BigInt,
        #[serde(with = "crate::picard::bigint_serde")]
        above: BigInt,
    },
}

impl GoodnessFailure {
    pub fn axis(&self) -> Option<SubaxisId> {
        match self {
            GoodnessFailure::ContainsSubaxis { axis, .. }
            | GoodnessFailure::ContactMismatch { axis, .. }
            | GoodnessFailure::Matching { axis, .. } => Some(*axis),
            GoodnessFailure::HorizontalMatching { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodnessReport {
    pub good: bool,
    pub failures: Vec<GoodnessFailure>,
}

/// Degree-level goodness test for a limit cycle: no component contains a
/// subaxis, declared contacts agree with the classes, both sides of every
/// interior subaxis carry the same contact (declared if given, computed
/// otherwise), and row sums match across every interior horizontal axis.
pub fn check_good(mosaic: &Mosaic, z: &CandidateCycle) -> Result<GoodnessReport> {
    z.validate(mosaic)?;
    let mut failures = Vec::new();
    let contact = |axis: SubaxisId, c: Component, side: Side| -> Result<(BigInt, Option<i64>)> {
        let computed = z.component(c).intersect(&mosaic.subaxis_class(c, side)?)?;
        let declared = z
            .contacts
            .iter()
            .find(|ct| ct.axis == axis && ct.component == c)
            .map(|ct| ct.degree);
        Ok((computed, declared))
    };

    for axis in mosaic.subaxes() {
        let mut used = Vec::new();
        for (c, side) in mosaic.adjacent(axis) {
            let (computed, declared) = contact(axis, c, side)?;
            if computed.is_negative() {
                failures.push(GoodnessFailure::ContainsSubaxis {
                    axis,
                    component: c,
                    degree: computed.clone(),
                });
            }
            if let Some(d) = declared {
                if BigInt::from(d) != computed {
                    failures.push(GoodnessFailure::ContactMismatch {
                        axis,
                        component: c,
                        declared: d,
                        computed: computed.clone(),
                    });
                }
            }
            used.push((c, declared.map_or(computed, BigInt::from)));
        }
        if used.len() == 2 && used[0].1 != used[1].1 {
            failures.push(GoodnessFailure::Matching {
                axis,
                degrees: used,
            });
        }
    }

    for row in 1..mosaic.a {
        let mut below = BigInt::zero();
        let mut above = BigInt::zero();
        for col in 1..=mosaic.b {
            let axis = SubaxisId::Horizontal { row, col };
            let (c, d) = contact(axis, (row, col), Side::Top)?;
            below += d.map_or(c, BigInt::from);
            let (c, d) = contact(axis, (row + 1, col), Side::Bottom)?;
            above += d.map_or(c, BigInt::from);
        }
        if below != above {
            failures.push(GoodnessFailure::HorizontalMatching { row, below, above });
        }
    }

    Ok(GoodnessReport {
        good: failures.is_empty(),
        failures,
    })
}

/// Converts a computed degree to `i64` for contact declarations.
pub fn degree_to_i64(x: &BigInt) -> Result<i64> {
    x.to_i64()
        .ok_or_else(|| Error::OutOfRange(format!("{x} does not fit in 64 bits")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(points: Vec<Vec<usize>>) -> Mosaic {
        Mosaic::new(points).unwrap()
    }

    #[test]
    fn restriction_examples() {
        let mo = m(vec![vec![0], vec![0]]);
        let l = MosaicBundle::without_points(&mo, vec![5], vec![2, 1]);
        assert_eq!(restrict(&mo, &l, 1, 1).unwrap(), RuledClass::f1_ints(5, 3, &[]));
        assert_eq!(restrict(&mo, &l, 2, 1).unwrap(), RuledClass::f1_ints(3, 2, &[]));
        assert_eq!(general_fibre(&mo, &l).unwrap(), RuledClass::f1_ints(5, 2, &[]));
        assert!(restrict(&mo, &l, 3, 1).is_err());

        let mo = m(vec![vec![0, 0]]);
        let l = MosaicBundle::without_points(&mo, vec![4, 2], vec![3]);
        assert_eq!(restrict(&mo, &l, 1, 2).unwrap(), RuledClass::f0_ints(2, 3, &[]));
        let a02 = SubaxisId::Horizontal { row: 0, col: 2 };
        assert_eq!(restrict_axis(&mo, &l, a02).unwrap(), 2.into());
    }

    #[test]
    fn axis_examples() {
        let mo = m(vec![vec![0], vec![0]]);
        let l = MosaicBundle::without_points(&mo, vec![5], vec![2, 1]);
        let a11 = SubaxisId::Horizontal { row: 1, col: 1 };
        assert_eq!(restrict_axis(&mo, &l, a11).unwrap(), 3.into());
        let b = SubaxisId::Vertical { row: 2, col: 1 };
        assert_eq!(restrict_axis(&mo, &l, b).unwrap(), 1.into());
        assert!(restrict_axis(&mo, &l, SubaxisId::Vertical { row: 3, col: 0 }).is_err());
        assert!(axis_consistency(&mo, &l).unwrap().iter().all(AxisCheck::consistent));
    }

    #[test]
    fn conservation_examples() {
        let mo = m(vec![vec![0], vec![0]]);
        let l = MosaicBundle::without_points(&mo, vec![5], vec![2, 1]);
        let rep = conservation_report(&mo, &l).unwrap();
        assert_eq!(rep.sum_self_int, 21.into());
        assert_eq!(rep.gen_self_int, 21.into());
        assert_eq!(rep.sum_adjoint, (-13).into());
        assert!(rep.holds());

        let mo = m(vec![vec![0, 0]]);
        let l = MosaicBundle::without_points(&mo, vec![3, 2], vec![1]);
        let rep = conservation_report(&mo, &l).unwrap();
        assert_eq!(rep.sum_self_int, 9.into());
        assert!(rep.holds());

        let mo = m(vec![vec![3]]);
        let l = MosaicBundle {
            u: vec![6],
            v: vec![4],
            m: vec![vec![vec![2, 1, 1]]],
        };
        assert!(conservation_report(&mo, &l).unwrap().holds());
    }

    #[test]
    fn subaxis_naming_and_adjacency() {
        let mo = m(vec![vec![0, 0], vec![0, 0]]);
        assert_eq!(mo.subaxes().len(), 3 * 2 + 2 * 3);
        assert_eq!(mo.interior_subaxes().len(), 2 + 2);
        let a = SubaxisId::Horizontal { row: 1, col: 1 };
        assert_eq!(a.to_string(), "A_{1,1}");
        assert_eq!(
            mo.adjacent(a),
            vec![((1, 1), Side::Top), ((2, 1), Side::Bottom)]
        );
        assert_eq!(
            mo.adjacent(SubaxisId::Vertical { row: 2, col: 1 }),
            vec![((2, 1), Side::Left), ((2, 2), Side::Right)]
        );
    }

    #[test]
    fn text_form_round_trips() {
        let mo = m(vec![vec![0, 5], vec![2, 0], vec![0, 4]]);
        assert_eq!(mo.to_string(), "3x2:(0,5)(2,0)(0,4)");
        assert_eq!("3 x 2 : (0,5)(2,0)(0,4)".parse::<Mosaic>().unwrap(), mo);
        assert!("2x2:(0,5)(2,0)(0,4)".parse::<Mosaic>().is_err());
        assert!("2x2:(0,5)(2)".parse::<Mosaic>().is_err());
    }

    #[test]
    fn extension() {
        let mo = m(vec![vec![1]]);
        let h = mo.extend(Direction::Horizontal);
        assert_eq!(h.points(), &[vec![1, 0]]);
        let v = mo.extend(Direction::Vertical);
        assert_eq!(v.points(), &[vec![0], vec![1]]);
        assert_eq!(
            h.extend(Direction::Vertical),
            v.extend(Direction::Horizontal)
        );
        let big = m(vec![vec![1, 2, 3], vec![4, 5, 6]]);
        assert_eq!(
            big.extend(Direction::Vertical).points(),
            &[vec![0, 0, 0], vec![1, 2, 3], vec![4, 5, 6]]
        );
    }

    #[test]
    fn zero_cycle_is_good() {
        let mo = m(vec![vec![2, 1], vec![0, 3]]);
        let rep = check_good(&mo, &CandidateCycle::zero(&mo)).unwrap();
        assert!(rep.good, "{rep:?}");
    }

    #[test]
    fn vertical_mismatch_is_reported() {
        let mo = m(vec![vec![0, 0]]);
        let mut z = CandidateCycle::zero(&mo);
        z.components[0][0] = RuledClass::f1_ints(2, 0, &[]);
        z.components[0][1] = RuledClass::f0_ints(0, 3, &[]);
        let rep = check_good(&mo, &z).unwrap();
        assert!(!rep.good);
        assert!(rep
            .failures
            .iter()
            .any(|f| f.axis() == Some(SubaxisId::Vertical { row: 1, col: 1 })));
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let mo = m(vec![vec![0, 0]]);
        let mut z = CandidateCycle::zero(&mo);
        z.components[0].pop();
        assert!(check_good(&mo, &z).is_err());
        let mut z = CandidateCycle::zero(&mo);
        z.components[0][1] = RuledClass::f1_ints(0, 0, &[]);
        assert!(check_good(&mo, &z).is_err());
    }

    #[test]
    fn json_shape() {
        let mo = m(vec![vec![1], vec![0]]);
        let data = MosaicData::new(
            mo,
            MosaicBundle {
                u: vec![5],
                v: vec![2, 1],
                m: vec![vec![vec![2]], vec![vec![]]],
            },
        )
        .unwrap();
        let json = serde_json::to_string(&data).unwrap();
        assert_eq!(
            json,
            r#"{"a":2,"b":1,"points":[[1],[0]],"u":[5],"v":[2,1],"m":[[[2]],[[]]]}"#
        );
        let back: MosaicData = serde_json::from_str(&json).unwrap();
        assert_eq!(back, data);
        let bad = r#"{"a":2,"b":1,"points":[[1],[0]],"u":[5],"v":[2,1],"m":[[[]],[[]]]}"#;
        assert!(serde_json::from_str::<MosaicData>(bad).is_err());
    }
}

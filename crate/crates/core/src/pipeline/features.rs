//! The seven feature representations of a segment.

use std::fmt;
use std::str::FromStr;

use ndarray::{s, Array2};

use super::factor::{factor_models, Anchor, AnchorResolver, FactorModel};
use super::{PipelineConfig, Segment};
use crate::error::{invalid, Error, Result};
use crate::geometry::{pca_fit, PcaModel, Point2, Point3, TimedPoint};
use crate::qsr::{
    argd_bin, cardir2d, cardir3d, mos_from_displacement, qtc_3d, qtc_c, qtc_radial_3d, AngleSign, CardinalDir2D,
    CardinalDir3D, MosState, Qtc3D, QtcC, QtcSign,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureKind {
    Raw3D,
    Quant3D,
    Qual3D,
    Quant2D,
    Qual2D,
    EventQual3D,
    EventQual2D,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 7] = [
        FeatureKind::Raw3D,
        FeatureKind::Quant3D,
        FeatureKind::Qual3D,
        FeatureKind::Quant2D,
        FeatureKind::Qual2D,
        FeatureKind::EventQual3D,
        FeatureKind::EventQual2D,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Raw3D => "3D-Raw",
            FeatureKind::Quant3D => "3D-Quant",
            FeatureKind::Qual3D => "3D-Qual",
            FeatureKind::Quant2D => "2D-Quant",
            FeatureKind::Qual2D => "2D-Qual",
            FeatureKind::EventQual3D => "3D-Event-Qual",
            FeatureKind::EventQual2D => "2D-Event-Qual",
        }
    }

    pub fn is_event_level(self) -> bool {
        matches!(self, FeatureKind::EventQual3D | FeatureKind::EventQual2D)
    }

    pub fn is_qualitative(self) -> bool {
        matches!(
            self,
            FeatureKind::Qual3D | FeatureKind::Qual2D | FeatureKind::EventQual3D | FeatureKind::EventQual2D
        )
    }

    /// Frame-level kind an event-level kind summarises.
    pub fn frame_source(self) -> Option<FeatureKind> {
        match self {
            FeatureKind::EventQual3D => Some(FeatureKind::Qual3D),
            FeatureKind::EventQual2D => Some(FeatureKind::Qual2D),
            _ => None,
        }
    }

    pub fn rows(self) -> usize {
        if self.is_event_level() {
            1
        } else {
            super::SEGMENT_FRAMES
        }
    }

    pub fn valid_names() -> String {
        FeatureKind::ALL.map(FeatureKind::name).join(", ")
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FeatureKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "unknown feature kind `{s}`; valid kinds: {}",
                    FeatureKind::valid_names()
                ))
            })
    }
}

/// Where a feature column comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub factor: String,
    pub item: String,
    pub feature: String,
    pub symbol: String,
}

impl Column {
    fn new(factor: &str, item: &str, feature: &str, symbol: &str) -> Column {
        Column {
            factor: factor.into(),
            item: item.into(),
            feature: feature.into(),
            symbol: symbol.into(),
        }
    }

    /// `factor:item:feature=symbol`
    pub fn header(&self) -> String {
        format!("{}:{}:{}={}", self.factor, self.item, self.feature, self.symbol)
    }
}

/// Per-segment feature matrix: 20 rows for frame-level kinds, 1 for event-level.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub kind: FeatureKind,
    pub values: Array2<f64>,
    pub legend: Vec<Column>,
}

impl FeatureMatrix {
    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }

    /// Ranges of columns forming one one-hot group (qualitative kinds only).
    pub fn onehot_groups(&self) -> Vec<std::ops::Range<usize>> {
        let mut groups = Vec::new();
        let mut start = 0;
        for i in 1..=self.legend.len() {
            let boundary = i == self.legend.len() || {
                let (a, b) = (&self.legend[i - 1], &self.legend[i]);
                (&a.factor, &a.item, &a.feature) != (&b.factor, &b.item, &b.feature)
            };
            if boundary {
                groups.push(start..i);
                start = i;
            }
        }
        groups
    }
}

/// Builds one row and, on request, the matching legend.
struct RowBuilder {
    row: Vec<f64>,
    legend: Option<Vec<Column>>,
}

impl RowBuilder {
    fn new(with_legend: bool) -> Self {
        RowBuilder {
            row: Vec::new(),
            legend: with_legend.then(Vec::new),
        }
    }

    fn onehot<S: AsRef<str>>(&mut self, factor: &str, item: &str, feature: &str, symbols: &[S], hot: usize) {
        debug_assert!(hot < symbols.len());
        for (i, sym) in symbols.iter().enumerate() {
            self.row.push(if i == hot { 1.0 } else { 0.0 });
            if let Some(l) = &mut self.legend {
                l.push(Column::new(factor, item, feature, sym.as_ref()));
            }
        }
    }

    fn real(&mut self, factor: &str, item: &str, feature: &str, component: &str, v: f64) {
        self.row.push(v);
        if let Some(l) = &mut self.legend {
            l.push(Column::new(factor, item, feature, component));
        }
    }
}

fn pair_name(a: Anchor, b: Anchor) -> String {
    format!("{}-{}", a.name(), b.name())
}

fn vector_name(a: Anchor, b: Anchor) -> String {
    format!("{}->{}", a.name(), b.name())
}

struct Symbols {
    cardir3d: Vec<String>,
    cardir2d: Vec<&'static str>,
    mos: Vec<&'static str>,
    argd: Vec<String>,
    qtc: Vec<&'static str>,
    angle: Vec<&'static str>,
}

impl Symbols {
    fn new(bins: usize) -> Symbols {
        Symbols {
            cardir3d: (0..CardinalDir3D::COUNT)
                .map(|i| CardinalDir3D::from_index(i).symbol())
                .collect(),
            cardir2d: CardinalDir2D::ALL.iter().map(|d| d.symbol()).collect(),
            mos: MosState::ALL.iter().map(|m| m.symbol()).collect(),
            argd: (0..bins).map(|i| i.to_string()).collect(),
            qtc: QtcSign::ALL.iter().map(|q| q.symbol()).collect(),
            angle: AngleSign::ALL.iter().map(|a| a.symbol()).collect(),
        }
    }
}

/// Anchor positions for every frame of a segment.
struct Track {
    times: Vec<f64>,
    anchors: Vec<[Point3; Anchor::COUNT]>,
}

impl Track {
    fn new(segment: &Segment) -> Result<Track> {
        let resolver = AnchorResolver::new(&segment.schema)?;
        Ok(Track {
            times: segment.frames.iter().map(|f| f.t).collect(),
            anchors: segment.frames.iter().map(|f| resolver.resolve(f)).collect(),
        })
    }

    fn at(&self, frame: usize, a: Anchor) -> Point3 {
        self.anchors[frame][a.slot()]
    }

    fn timed(&self, frame: usize, a: Anchor) -> TimedPoint {
        TimedPoint::new(self.times[frame], self.at(frame, a))
    }

    fn fit_pca(&self, factor: &FactorModel) -> Result<PcaModel> {
        let pooled: Vec<Point3> = self
            .anchors
            .iter()
            .flat_map(|frame| factor.members.iter().map(move |a| frame[a.slot()]))
            .collect();
        pca_fit(&pooled)
    }
}

fn check_segment(segment: &Segment) -> Result<()> {
    if segment.frames.len() != super::SEGMENT_FRAMES {
        return invalid(format!(
            "segment has {} frames, expected {}",
            segment.frames.len(),
            super::SEGMENT_FRAMES
        ));
    }
    Ok(())
}

fn assemble(kind: FeatureKind, rows: Vec<Vec<f64>>, legend: Vec<Column>) -> FeatureMatrix {
    let cols = legend.len();
    let n = rows.len();
    let flat: Vec<f64> = rows
        .into_iter()
        .inspect(|r| assert_eq!(r.len(), cols))
        .flatten()
        .collect();
    FeatureMatrix {
        kind,
        values: Array2::from_shape_vec((n, cols), flat).expect("row lengths checked"),
        legend,
    }
}

fn raw_3d(segment: &Segment) -> FeatureMatrix {
    let ids = segment.schema.point_ids();
    let mut legend = Vec::new();
    for id in &ids {
        let (entity, point) = id.split_once('/').unwrap_or((id, ""));
        for c in ["x", "y", "z"] {
            legend.push(Column::new(entity, point, "pos", c));
        }
    }
    let rows = segment
        .frames
        .iter()
        .map(|f| f.points.iter().flat_map(|p| p.to_array()).collect())
        .collect();
    assemble(FeatureKind::Raw3D, rows, legend)
}

fn quant_3d(track: &Track, factors: &[FactorModel]) -> FeatureMatrix {
    let mut rows = Vec::new();
    let mut legend = Vec::new();
    for f in 0..track.anchors.len() {
        let mut rb = RowBuilder::new(f == 0);
        for factor in factors {
            let name = factor.name();
            for &(a, b) in &factor.vectors {
                let v = track.at(f, b) - track.at(f, a);
                let item = vector_name(a, b);
                for (c, x) in ["x", "y", "z"].iter().zip(v.to_array()) {
                    rb.real(&name, &item, "vec", c, x);
                }
            }
        }
        if let Some(l) = rb.legend {
            legend = l;
        }
        rows.push(rb.row);
    }
    assemble(FeatureKind::Quant3D, rows, legend)
}

fn quant_2d(track: &Track, factors: &[FactorModel]) -> Result<FeatureMatrix> {
    let pcas = factors.iter().map(|f| track.fit_pca(f)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut legend = Vec::new();
    for f in 0..track.anchors.len() {
        let mut rb = RowBuilder::new(f == 0);
        for (factor, pca) in factors.iter().zip(&pcas) {
            let name = factor.name();
            for &(a, b) in &factor.vectors {
                let v = pca.project(track.at(f, b)) - pca.project(track.at(f, a));
                let item = vector_name(a, b);
                rb.real(&name, &item, "vec", "u", v.x);
                rb.real(&name, &item, "vec", "v", v.y);
            }
        }
        if let Some(l) = rb.legend {
            legend = l;
        }
        rows.push(rb.row);
    }
    Ok(assemble(FeatureKind::Quant2D, rows, legend))
}

fn mos_index(displacement: f64, dt: f64, v_min: f64) -> Result<usize> {
    Ok(mos_from_displacement(displacement, dt, v_min)?.index())
}

fn qual_3d(track: &Track, factors: &[FactorModel], cfg: &PipelineConfig) -> Result<FeatureMatrix> {
    let q = &cfg.qsr;
    let sym = Symbols::new(q.argd_bins);
    let mut rows = Vec::new();
    let mut legend = Vec::new();
    for f in 0..track.anchors.len() {
        let mut rb = RowBuilder::new(f == 0);
        for factor in factors {
            let name = factor.name();
            for &(a, b) in &factor.pairs {
                let item = pair_name(a, b);
                let (pa, pb) = (track.at(f, a), track.at(f, b));
                let dir = cardir3d(&[pa], &[pb])?;
                rb.onehot(&name, &item, "cardir3d", &sym.cardir3d, dir.index());

                let (mos_a, mos_b) = if f == 0 {
                    (MosState::Static.index(), MosState::Static.index())
                } else {
                    let dt = track.times[f] - track.times[f - 1];
                    (
                        mos_index(pa.distance(track.at(f - 1, a)), dt, q.v_min)?,
                        mos_index(pb.distance(track.at(f - 1, b)), dt, q.v_min)?,
                    )
                };
                rb.onehot(&name, &item, "mos.a", &sym.mos, mos_a);
                rb.onehot(&name, &item, "mos.b", &sym.mos, mos_b);

                let bin = argd_bin(pa.distance(pb), q.argd_width, q.argd_bins)?;
                rb.onehot(&name, &item, "argd", &sym.argd, bin.index);

                let qtc = match f {
                    0 => Qtc3D::STILL,
                    1 => match qtc_radial_3d(track.at(0, a), pa, track.at(0, b), pb, q) {
                        Ok((qa, qb)) => Qtc3D {
                            a: qa,
                            b: qb,
                            ..Qtc3D::STILL
                        },
                        Err(Error::InvalidInput(_)) => Qtc3D::STILL,
                        Err(e) => return Err(e),
                    },
                    _ => {
                        let hist = |x: Anchor| [track.timed(f - 2, x), track.timed(f - 1, x), track.timed(f, x)];
                        match qtc_3d(&hist(a), &hist(b), q) {
                            Ok(v) => v,
                            // Coincident points have no reference line.
                            Err(Error::InvalidInput(_)) => Qtc3D::STILL,
                            Err(e) => return Err(e),
                        }
                    }
                };
                rb.onehot(&name, &item, "qtc3d.a", &sym.qtc, qtc.a.index());
                rb.onehot(&name, &item, "qtc3d.b", &sym.qtc, qtc.b.index());
                rb.onehot(&name, &item, "qtc3d.yaw", &sym.angle, qtc.yaw.index());
                rb.onehot(&name, &item, "qtc3d.pitch", &sym.angle, qtc.pitch.index());
                rb.onehot(&name, &item, "qtc3d.roll", &sym.angle, qtc.roll.index());
            }
        }
        if let Some(l) = rb.legend {
            legend = l;
        }
        rows.push(rb.row);
    }
    Ok(assemble(FeatureKind::Qual3D, rows, legend))
}

fn qual_2d(track: &Track, factors: &[FactorModel], cfg: &PipelineConfig) -> Result<FeatureMatrix> {
    let q = &cfg.qsr;
    let sym = Symbols::new(q.argd_bins);
    let pcas = factors.iter().map(|f| track.fit_pca(f)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut legend = Vec::new();
    for f in 0..track.anchors.len() {
        let mut rb = RowBuilder::new(f == 0);
        for (factor, pca) in factors.iter().zip(&pcas) {
            let name = factor.name();
            let at = |frame: usize, x: Anchor| -> Point2 { pca.project(track.at(frame, x)) };
            for &(a, b) in &factor.pairs {
                let item = pair_name(a, b);
                let (pa, pb) = (at(f, a), at(f, b));
                let dir = cardir2d(pa, pb, q);
                rb.onehot(&name, &item, "cardir", &sym.cardir2d, dir.index());

                let (mos_a, mos_b) = if f == 0 {
                    (MosState::Static.index(), MosState::Static.index())
                } else {
                    let dt = track.times[f] - track.times[f - 1];
                    (
                        mos_index(pa.distance(at(f - 1, a)), dt, q.v_min)?,
                        mos_index(pb.distance(at(f - 1, b)), dt, q.v_min)?,
                    )
                };
                rb.onehot(&name, &item, "mos.a", &sym.mos, mos_a);
                rb.onehot(&name, &item, "mos.b", &sym.mos, mos_b);

                let bin = argd_bin(pa.distance(pb), q.argd_width, q.argd_bins)?;
                rb.onehot(&name, &item, "argd", &sym.argd, bin.index);

                let qtc = if f == 0 {
                    QtcC::STILL
                } else {
                    match qtc_c(at(f - 1, a), pa, at(f - 1, b), pb, q) {
                        Ok(v) => v,
                        Err(Error::InvalidInput(_)) => QtcC::STILL,
                        Err(e) => return Err(e),
                    }
                };
                for (slot, v) in ["qtc.a", "qtc.b", "qtc.c", "qtc.d"].iter().zip(qtc.slots()) {
                    rb.onehot(&name, &item, slot, &sym.qtc, v.index());
                }
            }
        }
        if let Some(l) = rb.legend {
            legend = l;
        }
        rows.push(rb.row);
    }
    Ok(assemble(FeatureKind::Qual2D, rows, legend))
}

/// First row, last row and their difference, concatenated.
pub fn summarise_event(frame_level: &FeatureMatrix) -> Result<FeatureMatrix> {
    let kind = match frame_level.kind {
        FeatureKind::Qual3D => FeatureKind::EventQual3D,
        FeatureKind::Qual2D => FeatureKind::EventQual2D,
        other => {
            return invalid(format!(
                "event summaries are built from qualitative frames, not {other}"
            ))
        }
    };
    let v = &frame_level.values;
    let d = v.ncols();
    let first = v.row(0);
    let last = v.row(v.nrows() - 1);
    let mut row = Array2::zeros((1, 3 * d));
    row.slice_mut(s![0, 0..d]).assign(&first);
    row.slice_mut(s![0, d..2 * d]).assign(&last);
    row.slice_mut(s![0, 2 * d..]).assign(&(&last - &first));
    let mut legend = Vec::with_capacity(3 * d);
    for block in ["first", "last", "diff"] {
        legend.extend(frame_level.legend.iter().map(|c| Column {
            item: format!("{}:{}", block, c.item),
            ..c.clone()
        }));
    }
    Ok(FeatureMatrix {
        kind,
        values: row,
        legend,
    })
}

/// Extracts one feature representation of a segment.
pub fn extract(kind: FeatureKind, segment: &Segment, cfg: &PipelineConfig) -> Result<FeatureMatrix> {
    check_segment(segment)?;
    if kind == FeatureKind::Raw3D {
        return Ok(raw_3d(segment));
    }
    let track = Track::new(segment)?;
    let factors = factor_models();
    match kind {
        FeatureKind::Raw3D => unreachable!(),
        FeatureKind::Quant3D => Ok(quant_3d(&track, &factors)),
        FeatureKind::Quant2D => quant_2d(&track, &factors),
        FeatureKind::Qual3D => qual_3d(&track, &factors, cfg),
        FeatureKind::Qual2D => qual_2d(&track, &factors, cfg),
        FeatureKind::EventQual3D => summarise_event(&qual_3d(&track, &factors, cfg)?),
        FeatureKind::EventQual2D => summarise_event(&qual_2d(&track, &factors, cfg)?),
    }
}

/// Embedded 2D trajectories of a factor model's points over a segment, with
/// the PCA fitted on them.
pub fn embed_factor(segment: &Segment, factor: &FactorModel) -> Result<(PcaModel, Vec<(Anchor, Vec<Point2>)>)> {
    check_segment(segment)?;
    let track = Track::new(segment)?;
    let pca = track.fit_pca(factor)?;
    let traces = factor
        .members
        .iter()
        .map(|&a| {
            (
                a,
                (0..track.anchors.len()).map(|f| pca.project(track.at(f, a))).collect(),
            )
        })
        .collect();
    Ok((pca, traces))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::LabelTuple;
    use crate::pipeline::{Frame, Schema, SEGMENT_FRAMES};

    fn scene(t: f64, hand_shift: f64) -> Vec<Point3> {
        let p = Point3::new;
        let block = |cx: f64, cy: f64| {
            [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)].map(|(dx, dy)| p(cx + 0.05 * dx, cy + 0.03 * dy, 0.0))
        };
        let mut pts = vec![
            p(-0.2, -0.5, 0.5),
            p(0.2, -0.5, 0.5),
            p(-0.2 + hand_shift * t, -0.2, 0.1),
            p(0.2, -0.2, 0.1 + 0.01 * (3.0 * t).sin()),
        ];
        pts.extend(block(0.0, 0.3));
        pts.extend(block(0.4, 0.5));
        pts
    }

    fn segment(hand_shift: f64) -> Segment {
        let frames = (0..SEGMENT_FRAMES)
            .map(|i| {
                let t = i as f64 / 24.0;
                Frame {
                    t,
                    points: scene(t, hand_shift),
                    tracked: vec![true; 12],
                }
            })
            .collect();
        Segment {
            session_id: "s".into(),
            index: 0,
            schema: Schema::blockworld(),
            frames,
            label: LabelTuple::NONE,
        }
    }

    #[test]
    fn kind_names_roundtrip() {
        for k in FeatureKind::ALL {
            assert_eq!(k.name().parse::<FeatureKind>().unwrap(), k);
        }
        let err = "4D-Qual".parse::<FeatureKind>().unwrap_err().to_string();
        assert!(err.contains("2D-Event-Qual"));
    }

    #[test]
    fn column_counts() {
        let seg = segment(0.3);
        let cfg = PipelineConfig::default();
        let expected = [
            (FeatureKind::Raw3D, 20, 36),
            (FeatureKind::Quant3D, 20, 42),
            (FeatureKind::Quant2D, 20, 28),
            (FeatureKind::Qual3D, 20, 12 * 89),
            (FeatureKind::Qual2D, 20, 12 * 65),
            (FeatureKind::EventQual3D, 1, 3 * 12 * 89),
            (FeatureKind::EventQual2D, 1, 3 * 12 * 65),
        ];
        for (kind, rows, cols) in expected {
            let m = extract(kind, &seg, &cfg).unwrap();
            assert_eq!((m.rows(), m.cols(), m.legend.len()), (rows, cols, cols), "{kind}");
            assert!(m.values.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn qualitative_rows_are_one_hot() {
        let seg = segment(0.3);
        for kind in [FeatureKind::Qual3D, FeatureKind::Qual2D] {
            let m = extract(kind, &seg, &PipelineConfig::default()).unwrap();
            let groups = m.onehot_groups();
            assert_eq!(groups.len(), 12 * if kind == FeatureKind::Qual3D { 9 } else { 8 });
            for row in m.values.rows() {
                for g in &groups {
                    let hot: Vec<f64> = row.slice(s![g.clone()]).to_vec();
                    assert_eq!(hot.iter().sum::<f64>(), 1.0);
                    assert!(hot.iter().all(|&v| v == 0.0 || v == 1.0));
                }
            }
        }
    }

    #[test]
    fn static_scene_has_still_qtc_and_static_mos() {
        let mut seg = segment(0.0);
        for f in &mut seg.frames {
            f.points = scene(0.0, 0.0);
        }
        let m = extract(FeatureKind::Qual2D, &seg, &PipelineConfig::default()).unwrap();
        for (j, col) in m.legend.iter().enumerate() {
            let on = m.values.column(j).iter().all(|&v| v == 1.0);
            if col.feature.starts_with("qtc") {
                assert_eq!(on, col.symbol == "0", "{}", col.header());
            }
            if col.feature.starts_with("mos") {
                assert_eq!(on, col.symbol == "s", "{}", col.header());
            }
        }
        let m = extract(FeatureKind::Qual3D, &seg, &PipelineConfig::default()).unwrap();
        for (j, col) in m.legend.iter().enumerate() {
            let on = m.values.column(j).iter().all(|&v| v == 1.0);
            if col.feature == "qtc3d.a" || col.feature == "qtc3d.b" {
                assert_eq!(on, col.symbol == "0", "{}", col.header());
            }
            if col.feature == "qtc3d.yaw" {
                assert_eq!(on, col.symbol == AngleSign::Degenerate.symbol(), "{}", col.header());
            }
        }
    }

    #[test]
    fn event_row_is_first_last_diff() {
        let seg = segment(0.4);
        let cfg = PipelineConfig::default();
        let frames = extract(FeatureKind::Qual2D, &seg, &cfg).unwrap();
        let event = extract(FeatureKind::EventQual2D, &seg, &cfg).unwrap();
        let d = frames.cols();
        for j in 0..d {
            let (a, b) = (frames.values[[0, j]], frames.values[[19, j]]);
            assert_eq!(event.values[[0, j]], a);
            assert_eq!(event.values[[0, d + j]], b);
            assert_eq!(event.values[[0, 2 * d + j]], b - a);
        }
    }

    #[test]
    fn features_are_translation_invariant() {
        // Avoid exact coordinate ties, which translation may round either way.
        let seg = segment(0.31);
        let mut moved = seg.clone();
        for f in &mut moved.frames {
            for p in &mut f.points {
                *p = *p + Point3::new(3.0, -1.0, 0.5);
            }
        }
        let cfg = PipelineConfig::default();
        for kind in [
            FeatureKind::Quant3D,
            FeatureKind::Quant2D,
            FeatureKind::Qual3D,
            FeatureKind::Qual2D,
        ] {
            let a = extract(kind, &seg, &cfg).unwrap().values;
            let b = extract(kind, &moved, &cfg).unwrap().values;
            let diff = (&a - &b).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(diff < 1e-9, "{kind}: {diff}");
        }
    }

    #[test]
    fn csv_has_comment_and_header() {
        let seg = segment(0.3);
        let m = extract(FeatureKind::Quant3D, &seg, &PipelineConfig::default()).unwrap();
        let mut buf = Vec::new();
        crate::pipeline::write_feature_csv(&mut buf, &m, "abcd").unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# kind=3D-Quant config=abcd");
        assert!(lines[1].starts_with("R:mid->hl:vec=x,"));
        assert_eq!(lines.len(), 22);
    }
}

//! The full recognition chain, certificates and batch scans.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contfrac::Rational;
use crate::graph::{goeritz_matrix, WhiteGraph};
use crate::ingest::TableRow;
use crate::lattice::{build_cm_lattice, AmbientVector, SigmaTail};
use crate::recognition::{
    extract_tangle, find_all_embeddings, flype2, FlypeMove, find_embedding, labels_from_ambient, locate_markers, normalize_fractional,
    reduce_to_half_integer, FlypeTrace, HalfIntegerReduction, Markers, NotFound, RecognitionError,
    SearchOutcome, TangleCertificate, VertexLabeling,
};
use crate::surgery::{montesinos_slope, theorem_slope};

pub const SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    FindEmbedding,
    NormalizeFractional,
    LocateMarkers,
    ExtractTangle,
    ReduceToHalfInteger,
    TheoremSlope,
    Verify,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::FindEmbedding => "find_embedding",
            Stage::NormalizeFractional => "normalize_fractional",
            Stage::LocateMarkers => "locate_markers",
            Stage::ExtractTangle => "extract_tangle",
            Stage::ReduceToHalfInteger => "reduce_to_half_integer",
            Stage::TheoremSlope => "theorem_slope",
            Stage::Verify => "verify",
        };
        f.write_str(s)
    }
}

/// A failure, tagged with the stage that raised it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{stage}: {message}")]
pub struct PipelineError {
    pub stage: Stage,
    pub message: String,
    /// Bad input rather than a broken invariant.
    pub input: bool,
}

impl PipelineError {
    fn at(stage: Stage, e: impl fmt::Display) -> Self {
        PipelineError { stage, message: e.to_string(), input: false }
    }

    fn from_search(e: RecognitionError) -> Self {
        let input = matches!(e, RecognitionError::InvalidInput(_) | RecognitionError::ContinuedFraction(_));
        PipelineError { stage: Stage::FindEmbedding, message: e.to_string(), input }
    }
}

/// The surgery description read off a recognized graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurgerySummary {
    pub p: i64,
    pub q: i64,
    pub n: i64,
    pub r: i64,
    /// `-p/q`, or `p/q` when mirrored.
    pub slope: Rational,
    pub mirror: bool,
    /// `-(n - 1 + a/(a+b))` for the extracted tangle slope `a/b`.
    pub montesinos: Rational,
    pub consistent: bool,
}

/// Everything produced after a labeling is found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Recognition {
    pub labeling: VertexLabeling,
    pub trace: FlypeTrace,
    pub normalized: VertexLabeling,
    pub markers: Markers,
    pub tangle: TangleCertificate,
    pub reduced: HalfIntegerReduction,
    pub surgery: SurgerySummary,
}

/// The outcome for one graph and slope.
///
/// In JSON the recognition fields sit at the top level next to `found`:
/// `sigma`, `labels`, `trace`, `normalized`, `markers`, `tangle`, `reduced`
/// and `surgery`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub schema: u32,
    pub pq: Rational,
    pub graph: WhiteGraph,
    pub found: bool,
    pub reason: Option<NotFound>,
    pub recognition: Option<Recognition>,
    /// Passed through verbatim from the input table.
    pub signature: Option<i64>,
}

#[derive(Serialize, Deserialize)]
struct RawCertificate {
    schema: u32,
    found: bool,
    pq: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reason: Option<NotFound>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma: Option<SigmaTail>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<AmbientVector>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trace: Option<FlypeTrace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    normalized: Option<Vec<AmbientVector>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    markers: Option<Markers>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tangle: Option<TangleCertificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reduced: Option<HalfIntegerReduction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    surgery: Option<SurgerySummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    signature: Option<i64>,
    graph: WhiteGraph,
}

impl Serialize for Certificate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rec = self.recognition.as_ref();
        RawCertificate {
            schema: self.schema,
            found: self.found,
            pq: self.pq.clone(),
            reason: self.reason.clone(),
            sigma: rec.map(|r| r.labeling.spec.sigma.clone()),
            labels: rec.map(|r| r.labeling.ambient_labels()),
            trace: rec.map(|r| r.trace.clone()),
            normalized: rec.map(|r| r.normalized.ambient_labels()),
            markers: rec.map(|r| r.markers),
            tangle: rec.map(|r| r.tangle.clone()),
            reduced: rec.map(|r| r.reduced.clone()),
            surgery: rec.map(|r| r.surgery.clone()),
            signature: self.signature,
            graph: self.graph.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Certificate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = RawCertificate::deserialize(d)?;
        let recognition = match raw.sigma {
            None => None,
            Some(sigma) => {
                let missing = |what: &str| D::Error::custom(format!("certificate has sigma but no {what}"));
                let spec = build_cm_lattice(&raw.pq, &sigma).map_err(D::Error::custom)?;
                let labels = raw.labels.ok_or_else(|| missing("labels"))?;
                let normalized = raw.normalized.ok_or_else(|| missing("normalized"))?;
                let flat = |v: &[AmbientVector]| labels_from_ambient(&spec, v).map_err(D::Error::custom);
                Some(Recognition {
                    labeling: VertexLabeling::new(spec.clone(), flat(&labels)?),
                    trace: raw.trace.ok_or_else(|| missing("trace"))?,
                    normalized: VertexLabeling::new(spec.clone(), flat(&normalized)?),
                    markers: raw.markers.ok_or_else(|| missing("markers"))?,
                    tangle: raw.tangle.ok_or_else(|| missing("tangle"))?,
                    reduced: raw.reduced.ok_or_else(|| missing("reduced"))?,
                    surgery: raw.surgery.ok_or_else(|| missing("surgery"))?,
                })
            }
        };
        Ok(Certificate {
            schema: raw.schema,
            pq: raw.pq,
            graph: raw.graph,
            found: raw.found,
            reason: raw.reason,
            recognition,
            signature: raw.signature,
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PipelineOptions {
    pub mirror: bool,
    pub verify: bool,
    /// After normalizing, flype the pieces of `G∖{v, w}` away from the
    /// tangle so that every `v`-`w` crossing sits next to it. Only
    /// meaningful when the graph comes from a planar diagram.
    pub gather: bool,
}

/// Flype2 on every component of `G∖{v, w}` that avoids the tangle path,
/// keeping the first one when there is no path.
fn gather_marker_edges(
    lab: VertexLabeling,
    trace: &mut FlypeTrace,
) -> Result<VertexLabeling, RecognitionError> {
    let Markers { v, w } = locate_markers(&lab)?;
    let tangle = extract_tangle(&lab)?;
    let g = lab.validate()?;
    if g.multiplicity(v, w) == 0 {
        return Ok(lab);
    }
    let mut mask = vec![true; lab.len()];
    mask[v] = false;
    mask[w] = false;
    let comps = g.components(&mask);
    let keep = comps
        .iter()
        .position(|c| c.iter().any(|u| tangle.path.contains(u)))
        .unwrap_or(0);
    let mut cur = lab;
    for (i, c) in comps.into_iter().enumerate() {
        if i == keep {
            continue;
        }
        cur = flype2(&cur, v, w, &c)?;
        trace.moves.push(FlypeMove::Flype2 { v, w, g1: c });
    }
    Ok(cur)
}

/// Normalizes, extracts and reduces a labeling.
pub fn complete_recognition(lab: VertexLabeling, opts: PipelineOptions) -> Result<Recognition, PipelineError> {
    let mirror = opts.mirror;
    let (mut normalized, mut trace) =
        normalize_fractional(&lab).map_err(|e| PipelineError::at(Stage::NormalizeFractional, e))?;
    if opts.gather {
        normalized = gather_marker_edges(normalized, &mut trace)
            .map_err(|e| PipelineError::at(Stage::NormalizeFractional, e))?;
    }
    let markers = locate_markers(&normalized).map_err(|e| PipelineError::at(Stage::LocateMarkers, e))?;
    let tangle = extract_tangle(&normalized).map_err(|e| PipelineError::at(Stage::ExtractTangle, e))?;
    let reduced = reduce_to_half_integer(&normalized, &tangle)
        .map_err(|e| PipelineError::at(Stage::ReduceToHalfInteger, e))?;
    let surgery = surgery_summary(&lab, &tangle, mirror)?;
    Ok(Recognition { labeling: lab, trace, normalized, markers, tangle, reduced, surgery })
}

fn surgery_summary(
    lab: &VertexLabeling,
    tangle: &TangleCertificate,
    mirror: bool,
) -> Result<SurgerySummary, PipelineError> {
    let spec = &lab.spec;
    let err = |e: crate::surgery::SurgeryError| PipelineError::at(Stage::TheoremSlope, e);
    let (p, slope) = theorem_slope(spec.n, spec.r, spec.q).map_err(err)?;
    if p != spec.p {
        return Err(PipelineError::at(Stage::TheoremSlope, format!("qn - r = {p} but p = {}", spec.p)));
    }
    let montesinos = montesinos_slope(&tangle.slope, spec.n - 1).map_err(err)?;
    let consistent = montesinos == slope;
    if !consistent {
        return Err(PipelineError::at(
            Stage::TheoremSlope,
            format!("tangle gives surgery {montesinos} but qn - r gives {slope}"),
        ));
    }
    Ok(SurgerySummary {
        p,
        q: spec.q,
        n: spec.n,
        r: spec.r,
        slope: if mirror { -slope } else { slope },
        mirror,
        montesinos,
        consistent,
    })
}

/// Runs the whole chain on one graph and slope.
pub fn run_pipeline(g: &WhiteGraph, pq: &Rational, opts: PipelineOptions) -> Result<Certificate, PipelineError> {
    let outcome = find_embedding(g, pq).map_err(PipelineError::from_search)?;
    let cert = match outcome {
        SearchOutcome::NotFound(reason) => Certificate {
            schema: SCHEMA,
            pq: pq.clone(),
            graph: g.clone(),
            found: false,
            reason: Some(reason),
            recognition: None,
            signature: None,
        },
        SearchOutcome::Found(lab) => Certificate {
            schema: SCHEMA,
            pq: pq.clone(),
            graph: g.clone(),
            found: true,
            reason: None,
            recognition: Some(complete_recognition(lab, opts)?),
            signature: None,
        },
    };
    if opts.verify {
        verify_certificate(&cert)?;
    }
    Ok(cert)
}

/// One certificate per labeling found, up to `limit`.
pub fn run_pipeline_all(
    g: &WhiteGraph,
    pq: &Rational,
    limit: usize,
    opts: PipelineOptions,
) -> Result<Vec<Certificate>, PipelineError> {
    let labs = find_all_embeddings(g, pq, limit).map_err(PipelineError::from_search)?;
    labs.into_iter()
        .map(|lab| {
            let cert = Certificate {
                schema: SCHEMA,
                pq: pq.clone(),
                graph: g.clone(),
                found: true,
                reason: None,
                recognition: Some(complete_recognition(lab, opts)?),
                signature: None,
            };
            if opts.verify {
                verify_certificate(&cert)?;
            }
            Ok(cert)
        })
        .collect()
}

/// Recomputes every claim in a certificate from the graph and labeling.
pub fn verify_certificate(cert: &Certificate) -> Result<(), PipelineError> {
    let fail = |msg: String| Err(PipelineError::at(Stage::Verify, msg));
    if cert.schema != SCHEMA {
        return fail(format!("unsupported schema {}", cert.schema));
    }
    let Some(rec) = &cert.recognition else {
        return match (cert.found, &cert.reason) {
            (false, Some(_)) => Ok(()),
            _ => fail("certificate without a recognition must be marked not found with a reason".into()),
        };
    };
    if !cert.found {
        return fail("certificate carries a recognition but is marked not found".into());
    }
    let verr = |e: RecognitionError| PipelineError::at(Stage::Verify, e);
    if rec.labeling.spec.pq != cert.pq {
        return fail(format!("labeling is for {} but the certificate is for {}", rec.labeling.spec.pq, cert.pq));
    }
    rec.labeling.validate_against(&cert.graph).map_err(verr)?;
    let det = goeritz_matrix(&cert.graph, None).map_err(|e| PipelineError::at(Stage::Verify, e))?.det();
    if det != BigInt::from(rec.labeling.spec.p) {
        return fail(format!("Goeritz determinant {det} is not p"));
    }
    let replayed = rec.trace.replay(&rec.labeling).map_err(verr)?;
    if replayed != rec.normalized {
        return fail("replaying the flype trace does not give the normalized labeling".into());
    }
    if locate_markers(&rec.normalized).map_err(verr)? != rec.markers {
        return fail("marker vertices differ".into());
    }
    let tangle = extract_tangle(&rec.normalized).map_err(verr)?;
    if tangle != rec.tangle {
        return fail("tangle certificate differs from the recomputed one".into());
    }
    let expected = Rational::new(rec.labeling.spec.q - rec.labeling.spec.r, rec.labeling.spec.r)
        .map_err(|e| PipelineError::at(Stage::Verify, e))?;
    if tangle.slope != expected {
        return fail(format!("tangle slope {} is not (q - r)/r = {expected}", tangle.slope));
    }
    let reduced = reduce_to_half_integer(&rec.normalized, &tangle).map_err(verr)?;
    if reduced != rec.reduced {
        return fail("reduction differs from the recomputed one".into());
    }
    let surgery = surgery_summary(&rec.labeling, &tangle, rec.surgery.mirror)?;
    if surgery != rec.surgery {
        return fail("surgery summary differs from the recomputed one".into());
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    /// The table's determinant disagrees with the Goeritz determinant.
    Flagged,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRowResult {
    pub name: String,
    pub status: RowStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub det: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Every slope that was searched.
    pub tried: Vec<Rational>,
    /// Certificates for the slopes that were recognized.
    pub hits: Vec<Certificate>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanTotals {
    pub rows: usize,
    pub ok: usize,
    pub flagged: usize,
    pub errors: usize,
    pub hits: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanReport {
    pub schema: u32,
    pub pmax: i64,
    pub qmax: i64,
    pub rows: Vec<ScanRowResult>,
    pub totals: ScanTotals,
}

/// A table row as read, or the parse error in its place.
pub type ScanInput = Result<TableRow, String>;

fn scan_row(row: &ScanInput, pmax: i64, qmax: i64, opts: PipelineOptions) -> ScanRowResult {
    let mut out = ScanRowResult {
        name: String::new(),
        status: RowStatus::Error,
        det: None,
        error: None,
        tried: Vec::new(),
        hits: Vec::new(),
    };
    let row = match row {
        Ok(r) => r,
        Err(e) => {
            out.error = Some(e.clone());
            return out;
        }
    };
    out.name = row.name.clone();
    let g = match row.white_graph() {
        Ok(g) => g,
        Err(e) => {
            out.error = Some(e.to_string());
            return out;
        }
    };
    let det = match goeritz_matrix(&g, None) {
        Ok(gm) => gm.det(),
        Err(e) => {
            out.error = Some(e.to_string());
            return out;
        }
    };
    out.det = Some(det.to_string());
    if let Some(d) = row.det {
        if BigInt::from(d) != det {
            out.status = RowStatus::Flagged;
            out.error = Some(format!("table determinant {d} differs from the Goeritz determinant {det}"));
            return out;
        }
    }
    let Ok(p) = i64::try_from(&det) else {
        out.error = Some(format!("determinant {det} is too large"));
        return out;
    };
    for q in 2..=qmax {
        if !(q < p && p <= pmax) || p.gcd(&q) != 1 {
            continue;
        }
        let pq = Rational::new(p, q).expect("q > 0");
        out.tried.push(pq.clone());
        match run_pipeline(&g, &pq, opts) {
            Ok(mut cert) if cert.found => {
                cert.signature = row.signature;
                out.hits.push(cert);
            }
            Ok(_) => {}
            Err(e) => {
                out.error = Some(e.to_string());
                return out;
            }
        }
    }
    out.status = RowStatus::Ok;
    out
}

/// Tries every admissible slope on every row. Rows are processed on `jobs`
/// threads (all cores when `None`); the report keeps input order.
pub fn scan(
    rows: &[ScanInput],
    pmax: i64,
    qmax: i64,
    jobs: Option<usize>,
    opts: PipelineOptions,
) -> Result<ScanReport, rayon::ThreadPoolBuildError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build()?;
    let results: Vec<ScanRowResult> =
        pool.install(|| rows.par_iter().map(|r| scan_row(r, pmax, qmax, opts)).collect());
    let mut totals = ScanTotals { rows: results.len(), ..Default::default() };
    for r in &results {
        match r.status {
            RowStatus::Ok => totals.ok += 1,
            RowStatus::Flagged => totals.flagged += 1,
            RowStatus::Error => totals.errors += 1,
        }
        totals.hits += r.hits.len();
    }
    Ok(ScanReport { schema: SCHEMA, pmax, qmax, rows: results, totals })
}

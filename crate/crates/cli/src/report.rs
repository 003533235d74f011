use rayon::prelude::*;
use serde::Serialize;

use perbound::boundary::{
    boundary_algebra_of, verify_cstar_axioms, verify_restricted_automorphism, AutomorphismReport,
    CStarReport,
};
use perbound::channel::JsonMatrix;
use perbound::classify::{
    classify_with, AutomorphismCheck, BlockSummary, ConditionResult, DomainSummary,
    ProductWitness,
};
use perbound::spectral::{
    check_peripheral_diagonalizable, decay_verify, peripheral_decomposition, power_space_equality,
    spectrum, DecayVerdict, DiagonalizabilityReport, EigenCluster, PowerSpaceReport,
};
use perbound::{CMatrix, Channel, PeripheralDecomposition, ToleranceConfig, ValidationReport, C64};

use crate::request::{AnalysisRequest, Command};

/// Samples drawn for the C*-identity check, besides the basis itself.
const CSTAR_SAMPLES: usize = 8;

pub(crate) fn json_matrix(m: &CMatrix) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSummary {
    pub eigenvalues: Vec<EigenCluster>,
    pub peripheral: Vec<EigenCluster>,
    pub transient_radius: f64,
    pub spectral_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BasisEntry {
    pub eigenvalue: C64,
    pub matrix: JsonMatrix,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransientDecay {
    /// Every transient basis element reached the decay tolerance.
    pub all_decay: bool,
    pub inconclusive: usize,
    pub max_first_n: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionSummary {
    pub dim_p: usize,
    pub dim_n: usize,
    pub peripheral_basis: Vec<BasisEntry>,
    pub diagonalizable: DiagonalizabilityReport,
    pub power_spaces: Vec<PowerSpaceReport>,
    pub transient_decay: TransientDecay,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundarySummary {
    pub dim: usize,
    pub center_dim: usize,
    pub structure_checksum: f64,
    pub closure_residual: f64,
    pub ordinary_product_gap: f64,
    pub cstar: CStarReport,
    pub restricted_automorphism: AutomorphismReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessSummary {
    pub x: JsonMatrix,
    pub y: JsonMatrix,
    pub ce_product: JsonMatrix,
    pub ordinary: JsonMatrix,
}

impl From<&ProductWitness> for WitnessSummary {
    fn from(w: &ProductWitness) -> Self {
        WitnessSummary {
            x: json_matrix(&w.x),
            y: json_matrix(&w.y),
            ce_product: json_matrix(&w.ce_product),
            ordinary: json_matrix(&w.ordinary),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PASummary {
    pub peripherally_automorphic: bool,
    pub agree: bool,
    pub c1_peripheral_in_domain: ConditionResult,
    pub c2_peripheral_in_domain_powers: ConditionResult,
    pub c3_product_is_ordinary: ConditionResult,
    pub c4_eigenspace_isometry: ConditionResult,
    pub c5_kraus_intertwining: ConditionResult,
    pub closure_gap: f64,
    pub multiplicative_domain: DomainSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StationaritySummary {
    pub stationary: bool,
    pub star_closed: bool,
    pub algebra_dim: usize,
    pub rho0: JsonMatrix,
    pub faithful_gap: f64,
    pub rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<JsonMatrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_sub_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_defect: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlocksSummary {
    #[serde(flatten)]
    pub summary: BlockSummary,
    pub projections: Vec<JsonMatrix>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationSummary {
    pub peripherally_automorphic: PASummary,
    pub stationarity: StationaritySummary,
    pub irreducible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<BlocksSummary>,
    pub automorphism: AutomorphismCheck,
}

#[derive(Debug, Clone, Serialize)]
pub struct CommandError {
    pub command: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChannelReport {
    pub label: String,
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<DecompositionSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundarySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassificationSummary>,
    pub warnings: Vec<String>,
    pub errors: Vec<CommandError>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub seed: u64,
    pub tolerances: ToleranceConfig,
    pub commands: Vec<&'static str>,
    pub channels: Vec<ChannelReport>,
}

impl AnalysisReport {
    pub fn error_count(&self) -> usize {
        self.channels.iter().map(|c| c.errors.len()).sum()
    }
}

/// Runs every requested analysis on every channel; channels are processed in parallel and
/// reported in input order.
pub fn run(request: &AnalysisRequest) -> AnalysisReport {
    let channels = request
        .channels
        .par_iter()
        .map(|rc| analyse(&rc.label, &rc.channel, request))
        .collect();
    AnalysisReport {
        seed: request.seed,
        tolerances: request.tolerances,
        commands: request.commands.iter().map(|c| c.name()).collect(),
        channels,
    }
}

fn analyse(label: &str, ch: &Channel, request: &AnalysisRequest) -> ChannelReport {
    let tol = &request.tolerances;
    let mut report = ChannelReport {
        label: label.to_string(),
        dim: ch.dim(),
        validation: None,
        spectrum: None,
        decomposition: None,
        boundary: None,
        classification: None,
        warnings: Vec::new(),
        errors: Vec::new(),
    };

    // The decomposition feeds three analyses; compute it once, on demand.
    let mut dec_cache: Option<perbound::Result<PeripheralDecomposition>> = None;
    let mut decomposition = |ch: &Channel| -> perbound::Result<PeripheralDecomposition> {
        dec_cache
            .get_or_insert_with(|| peripheral_decomposition(ch, tol))
            .clone()
    };

    for &command in &request.commands {
        let outcome = match command {
            Command::Validate => {
                report.validation = Some(ch.validate(tol));
                Ok(())
            }
            Command::Spectrum => spectrum_section(ch, tol, &mut report),
            Command::Decompose => decomposition(ch)
                .and_then(|dec| decomposition_section(ch, &dec, tol, &mut report)),
            Command::Boundary => {
                decomposition(ch).and_then(|dec| boundary_section(ch, dec, request, &mut report))
            }
            Command::Classify => decomposition(ch)
                .and_then(|dec| classification_section(ch, &dec, request, &mut report)),
            Command::All => Ok(()),
        };
        if let Err(e) = outcome {
            report.errors.push(CommandError {
                command: command.name(),
                message: e.to_string(),
            });
        }
    }
    report
}

fn spectrum_section(ch: &Channel, tol: &ToleranceConfig, report: &mut ChannelReport) -> perbound::Result<()> {
    let data = spectrum(ch, tol)?;
    for z in &data.ambiguous {
        report.warnings.push(format!(
            "BoundaryAmbiguity: eigenvalue {:.6e}{:+.6e}i lies just inside the peripheral cutoff",
            z.re, z.im
        ));
    }
    report.spectrum = Some(SpectrumSummary {
        spectral_gap: data.spectral_gap(),
        eigenvalues: data.eigenvalues,
        peripheral: data.peripheral,
        transient_radius: data.transient_radius,
    });
    Ok(())
}

fn decomposition_section(
    ch: &Channel,
    dec: &PeripheralDecomposition,
    tol: &ToleranceConfig,
    report: &mut ChannelReport,
) -> perbound::Result<()> {
    let mut decay = TransientDecay {
        all_decay: true,
        inconclusive: 0,
        max_first_n: 0,
    };
    for x in dec.n_basis.elements() {
        let r = decay_verify(ch, x, None, 1e-10, tol)?;
        match r.verdict {
            DecayVerdict::Decays => decay.max_first_n = decay.max_first_n.max(r.first_n.unwrap_or(0)),
            DecayVerdict::DoesNotDecay => decay.all_decay = false,
            DecayVerdict::Inconclusive => {
                decay.all_decay = false;
                decay.inconclusive += 1;
            }
        }
    }
    if decay.inconclusive > 0 {
        report.warnings.push(format!(
            "InconclusiveDecay: {} transient basis elements did not reach tolerance",
            decay.inconclusive
        ));
    }
    report.decomposition = Some(DecompositionSummary {
        dim_p: dec.dim_p(),
        dim_n: dec.dim_n(),
        peripheral_basis: dec
            .p_basis
            .iter()
            .map(|p| BasisEntry {
                eigenvalue: p.eigenvalue,
                matrix: json_matrix(&p.vector),
            })
            .collect(),
        diagonalizable: check_peripheral_diagonalizable(ch, tol)?,
        power_spaces: [2, 3]
            .into_iter()
            .map(|m| power_space_equality(ch, m, tol))
            .collect::<perbound::Result<_>>()?,
        transient_decay: decay,
    });
    Ok(())
}

fn boundary_section(
    ch: &Channel,
    dec: PeripheralDecomposition,
    request: &AnalysisRequest,
    report: &mut ChannelReport,
) -> perbound::Result<()> {
    let tol = &request.tolerances;
    let alg = boundary_algebra_of(dec, tol)?;
    report.boundary = Some(BoundarySummary {
        dim: alg.dim(),
        center_dim: alg.center_dim,
        structure_checksum: alg.checksum(),
        closure_residual: alg.closure_residual,
        ordinary_product_gap: alg.ordinary_product_gap,
        cstar: verify_cstar_axioms(&alg, CSTAR_SAMPLES, request.seed)?,
        restricted_automorphism: verify_restricted_automorphism(ch, tol)?,
    });
    Ok(())
}

fn classification_section(
    ch: &Channel,
    dec: &PeripheralDecomposition,
    request: &AnalysisRequest,
    report: &mut ChannelReport,
) -> perbound::Result<()> {
    let c = classify_with(ch, dec, request.seed, &request.tolerances)?;
    if !c.pa.domain.stabilized {
        report.warnings.push(format!(
            "NotStabilized: multiplicative domain still shrinking at k = {}",
            c.pa.domain.stabilized_at
        ));
    }
    let st = &c.stationarity;
    report.classification = Some(ClassificationSummary {
        peripherally_automorphic: PASummary {
            peripherally_automorphic: c.pa.overall,
            agree: c.pa.agree,
            c1_peripheral_in_domain: c.pa.c1,
            c2_peripheral_in_domain_powers: c.pa.c2,
            c3_product_is_ordinary: c.pa.c3,
            c4_eigenspace_isometry: c.pa.c4,
            c5_kraus_intertwining: c.pa.c5,
            closure_gap: c.pa.closure_gap,
            multiplicative_domain: c.pa.domain,
            witness: c.pa.witness.as_ref().map(WitnessSummary::from),
        },
        stationarity: StationaritySummary {
            stationary: st.stationary,
            star_closed: st.star_closed,
            algebra_dim: st.algebra_dim,
            rho0: json_matrix(st.rho0.rho()),
            faithful_gap: st.faithful_gap,
            rank: st.rank,
            witness: st.witness.as_ref().map(json_matrix),
            witness_sub_gap: st.witness_sub_gap,
            witness_defect: st.witness_defect,
        },
        irreducible: c.irreducible(),
        blocks: c.blocks.as_ref().map(|b| BlocksSummary {
            summary: b.summary(),
            projections: b.projections.iter().map(json_matrix).collect(),
        }),
        automorphism: c.automorphism,
    });
    Ok(())
}

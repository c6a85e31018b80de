//! Production-plan classification and support rules.
//!
//! A plan claims one of four kinds of new combination. Each kind has its own
//! gates, and the gates that pass decide which support instruments are
//! recommended. A final guardrail withdraws support from established
//! industries that are not modernizing or restructuring.
//!
//! Rules never read `applicant_metadata`: who the applicant is has no bearing
//! on the outcome, only the economic and technological content of the plan.

use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::io_core::IoTable;
use crate::linkage::LinkageReport;
use crate::merger::{screen, HhiVerdict, MergerAction, MergerScenario};
use crate::tech::{tca, tcc, FieldViolation, TechClass, TechnologyProfile, SCORE_MAX};

pub const PLAN_SCHEMA_VERSION: u32 = 1;
pub const EVALUATION_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("invalid production plan: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<FieldViolation>),
    #[error("plan claims {claimed:?} but was sent to the group {group} rules")]
    WrongGroup { claimed: NoveltyClaim, group: u8 },
    #[error("unsupported schema_version {0}")]
    SchemaVersion(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NoveltyClaim {
    NewGood,
    NewMethod,
    NewMarket,
    NewOrganization,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MarketCase {
    /// Government committed to buy under its own strategic plans.
    GovernmentProcurement,
    /// Predicted growth of the domestic market.
    DomesticGrowthPrediction,
    /// Predicted growth of the global market.
    GlobalGrowthPrediction,
}

impl MarketCase {
    pub fn involves_tariff(self) -> bool {
        !matches!(self, MarketCase::GlobalGrowthPrediction)
    }
}

/// Contract terms every tariff recommendation must carry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TariffTerms {
    pub contract_reference: String,
    pub duration_months: u32,
}

fn default_schema() -> u32 {
    PLAN_SCHEMA_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductionPlan {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub title: String,
    /// Identity of the applicant. Opaque to every rule.
    #[serde(default)]
    pub applicant_metadata: serde_json::Value,
    pub claimed_novelty: NoveltyClaim,
    /// A new source of supply, folded into the new-good or new-method group.
    #[serde(default)]
    pub new_supply_source: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub technology_profile: Option<TechnologyProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tech_class: Option<TechClass>,
    /// TCC of the incumbent method, for the TCA comparison.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_tcc: Option<f64>,
    #[serde(default)]
    pub foreign_investment: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub market_case: Option<MarketCase>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub merger: Option<MergerScenario>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tariff_terms: Option<TariffTerms>,
    /// Technology Assessment attestation that the merger's claimed objectives hold.
    #[serde(default)]
    pub claimed_objectives_verified: bool,
    /// Technology Assessment attestation of technical and engineering feasibility.
    #[serde(default)]
    pub feasibility_confirmed: bool,
    /// Economic Core attestation of probable demand at mass production.
    #[serde(default)]
    pub demand_probable_at_mass_production: bool,
    #[serde(default)]
    pub price_reduction_expected: bool,
    #[serde(default)]
    pub is_established_industry: bool,
    #[serde(default)]
    pub involves_modernization_or_restructuring: bool,
}

impl ProductionPlan {
    /// A plan with every optional field empty and every attestation false.
    pub fn new(title: impl Into<String>, claimed_novelty: NoveltyClaim) -> Self {
        Self {
            schema_version: PLAN_SCHEMA_VERSION,
            id: None,
            title: title.into(),
            applicant_metadata: serde_json::Value::Null,
            claimed_novelty,
            new_supply_source: false,
            technology_profile: None,
            tech_class: None,
            baseline_tcc: None,
            foreign_investment: false,
            market_case: None,
            merger: None,
            tariff_terms: None,
            claimed_objectives_verified: false,
            feasibility_confirmed: false,
            demand_probable_at_mass_production: false,
            price_reduction_expected: false,
            is_established_industry: false,
            involves_modernization_or_restructuring: false,
        }
    }

    /// Declared class: the plan's own field, else the profile's.
    pub fn effective_tech_class(&self) -> Option<TechClass> {
        self.tech_class
            .or_else(|| self.technology_profile.as_ref().and_then(|p| p.tech_class))
    }

    /// Structural checks: the fields the claimed group needs are present and valid.
    pub fn violations(&self) -> Vec<FieldViolation> {
        let mut out = Vec::new();
        let mut bad = |field: &str, message: &str| {
            out.push(FieldViolation {
                field: field.to_string(),
                message: message.to_string(),
            })
        };
        if self.schema_version != PLAN_SCHEMA_VERSION {
            bad("schema_version", "unsupported schema version");
        }
        if let Some(p) = &self.technology_profile {
            for v in p.violations() {
                bad(&format!("technology_profile.{}", v.field), &v.message);
            }
        }
        if let Some(b) = self.baseline_tcc {
            if !(0.0..=SCORE_MAX).contains(&b) {
                bad("baseline_tcc", "must lie in [0, 9]");
            }
        }
        if let Some(t) = &self.tariff_terms {
            if t.contract_reference.trim().is_empty() {
                bad("tariff_terms.contract_reference", "must not be empty");
            }
            if t.duration_months == 0 {
                bad("tariff_terms.duration_months", "tariff support must have a positive time limit");
            }
        }
        match self.claimed_novelty {
            NoveltyClaim::NewGood => {}
            NoveltyClaim::NewMethod => {
                if self.technology_profile.is_none() {
                    bad("technology_profile", "required for a new-method plan");
                }
                if self.effective_tech_class().is_none() {
                    bad("tech_class", "required for a new-method plan");
                }
            }
            NoveltyClaim::NewMarket => match self.market_case {
                None => bad("market_case", "required for a new-market plan"),
                Some(case) if case.involves_tariff() && self.tariff_terms.is_none() => bad(
                    "tariff_terms",
                    "procurement and domestic-growth cases involve a tariff, which needs a contract and time limit",
                ),
                Some(_) => {}
            },
            NoveltyClaim::NewOrganization => {
                if self.merger.is_none() {
                    bad("merger", "required for a merger (new organization) plan");
                }
            }
        }
        if self.new_supply_source
            && !matches!(self.claimed_novelty, NoveltyClaim::NewGood | NoveltyClaim::NewMethod)
        {
            bad(
                "new_supply_source",
                "a new source of supply is claimed under the new-good or new-method group",
            );
        }
        out
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(PlanError::Invalid(v))
        }
    }
}

/// The four new-combination groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Group {
    NewGood = 1,
    NewMethod = 2,
    NewMarket = 3,
    Merger = 4,
}

impl Group {
    pub fn number(self) -> u8 {
        self as u8
    }
}

pub fn classify_plan(p: &ProductionPlan) -> Result<Group, PlanError> {
    p.validate()?;
    Ok(match p.claimed_novelty {
        NoveltyClaim::NewGood => Group::NewGood,
        NoveltyClaim::NewMethod => Group::NewMethod,
        NoveltyClaim::NewMarket => Group::NewMarket,
        NoveltyClaim::NewOrganization => Group::Merger,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateId {
    TechnicalFeasibility,
    MassProductionDemand,
    AdvancedTechnologyClass,
    PriceReduction,
    ForeignInvestmentTechnology,
    MarketCase,
    ObjectivesVerified,
    MarketConcentration,
    EstablishedIndustryRenewal,
}

impl GateId {
    /// Which body of the assessing institution owns the gate.
    pub fn owner(self) -> &'static str {
        match self {
            GateId::TechnicalFeasibility | GateId::ObjectivesVerified => "technology assessment",
            _ => "economic core",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateOutcome {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateResult {
    pub gate: GateId,
    pub outcome: GateOutcome,
    pub evidence: String,
}

/// Support instruments, in catalog order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Instrument {
    CreditCreationWithProductiveMeansCollateral,
    CreditAtMinimumInterest,
    TariffByContractTimeLimited,
    GovernmentProcurementContract,
    ExportSubsidyOrGuaranteeFund,
    BilateralTradeAgreementFacilitation,
    DirectSubsidy,
    TaxRelief,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TariffGrantTerms {
    pub contract_reference: String,
    pub duration_months: u32,
    /// Domestic price must converge to the world price over the contract.
    pub converge_to_world_price: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstrumentGrant {
    pub instrument: Instrument,
    /// Gates that passed (for support) or failed (for `Reject`).
    pub justified_by: Vec<GateId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tariff_terms: Option<TariffGrantTerms>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Support,
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleId {
    Classification,
    SupplySourceFolded,
    NewGoodFeasibility,
    NewGoodDemand,
    NewGoodCredit,
    NewMethodTechnologyContent,
    NewMethodForeignInvestment,
    NewMethodAdvancedClass,
    NewMethodPriceReduction,
    NewMethodSupport,
    NewMarketProcurement,
    NewMarketDomesticGrowth,
    NewMarketGlobalGrowth,
    NewMarketInvestmentMonitoringUnmodeled,
    MergerObjectives,
    MergerConcentration,
    MergerSupport,
    EstablishedIndustryGuardrail,
    Rejection,
}

impl RuleId {
    /// The policy clause the rule implements.
    pub fn basis(self) -> &'static str {
        use RuleId::*;
        match self {
            Classification => "new combinations: one claimed group per submission",
            SupplySourceFolded => "new combinations: a new supply source is handled as a new good or new method",
            NewGoodFeasibility => "group 1 (new good): technology assessment confirms technical and engineering ability",
            NewGoodDemand => "group 1 (new good): economic core attests probable demand at mass production",
            NewGoodCredit => "group 1 (new good): credit creation with productive means as collateral",
            NewMethodTechnologyContent => "group 2 (new method): change in technology content added is reported",
            NewMethodForeignInvestment => "group 2 (new method): foreign investment supported only with pacing or emerging technology",
            NewMethodAdvancedClass => "group 2 (new method): pacing and emerging technology supported in any case",
            NewMethodPriceReduction => "group 2 (new method): base and key technology judged on final-price reduction",
            NewMethodSupport => "group 2 (new method): transfer of productive means through credit",
            NewMarketProcurement => "group 3 (new market): government procurement commitment",
            NewMarketDomesticGrowth => "group 3 (new market): domestic growth under a time-limited tariff contract",
            NewMarketGlobalGrowth => "group 3 (new market): global growth through export support and trade agreements",
            NewMarketInvestmentMonitoringUnmodeled => "group 3 (new market): shortage and excess investment monitoring",
            MergerObjectives => "group 4 (merger): technology assessment verifies claimed objectives",
            MergerConcentration => "group 4 (merger): market concentration screen",
            MergerSupport => "group 4 (merger): direct subsidies and tax relief",
            EstablishedIndustryGuardrail => "guardrail: established industries only with modernization or restructuring",
            Rejection => "no passing path to support",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub seq: u32,
    pub rule: RuleId,
    pub basis: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate: Option<GateId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<GateOutcome>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TcaEvidence {
    pub tcc: f64,
    pub tca: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_tcc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_tca: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tca_delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluation_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_id: Option<String>,
    /// Earlier evaluation of the same plan that this one replaces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supersedes: Option<String>,
    pub evaluated_at: DateTime<Utc>,
    pub group: u8,
    pub claimed_novelty: NoveltyClaim,
    pub decision: Decision,
    pub gates: Vec<GateResult>,
    pub instruments: Vec<InstrumentGrant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub technology_content: Option<TcaEvidence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub merger_verdict: Option<HhiVerdict>,
    pub audit: Vec<AuditEntry>,
}

impl Evaluation {
    pub fn instrument_set(&self) -> Vec<Instrument> {
        self.instruments.iter().map(|g| g.instrument).collect()
    }

    pub fn gate(&self, id: GateId) -> Option<&GateResult> {
        self.gates.iter().find(|g| g.gate == id)
    }

    /// The same evaluation with identifiers and timestamp blanked, for comparisons.
    pub fn without_volatile(&self) -> Self {
        Self {
            evaluation_id: None,
            plan_id: None,
            supersedes: None,
            evaluated_at: DateTime::<Utc>::UNIX_EPOCH,
            ..self.clone()
        }
    }

    /// Reject excludes support; every support grant rests on passed gates;
    /// every grant is cited in the audit.
    pub fn check_invariants(&self) -> Result<(), String> {
        let rejected = self.instruments.iter().any(|g| g.instrument == Instrument::Reject);
        if rejected && self.instruments.len() != 1 {
            return Err("Reject appears together with support instruments".into());
        }
        if self.instruments.is_empty() {
            return Err("no instrument and no rejection".into());
        }
        if rejected != (self.decision == Decision::Reject) {
            return Err("decision disagrees with instruments".into());
        }
        for grant in &self.instruments {
            if grant.justified_by.is_empty() {
                return Err(format!("{:?} has no justifying gate", grant.instrument));
            }
            let wanted = if grant.instrument == Instrument::Reject {
                GateOutcome::Fail
            } else {
                GateOutcome::Pass
            };
            for id in &grant.justified_by {
                match self.gate(*id) {
                    Some(g) if g.outcome == wanted => {}
                    _ => return Err(format!("{:?} cites gate {id:?} without outcome {wanted:?}", grant.instrument)),
                }
                if !self.audit.iter().any(|a| a.gate == Some(*id)) {
                    return Err(format!("gate {id:?} missing from the audit"));
                }
            }
            if grant.instrument == Instrument::TariffByContractTimeLimited && grant.tariff_terms.is_none() {
                return Err("tariff granted without contract terms".into());
            }
        }
        Ok(())
    }
}

impl fmt::Display for Instrument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

struct Builder {
    group: Group,
    claimed: NoveltyClaim,
    gates: Vec<GateResult>,
    grants: Vec<InstrumentGrant>,
    audit: Vec<AuditEntry>,
    technology_content: Option<TcaEvidence>,
    merger_verdict: Option<HhiVerdict>,
}

impl Builder {
    fn new(p: &ProductionPlan, group: Group) -> Self {
        let mut b = Self {
            group,
            claimed: p.claimed_novelty,
            gates: Vec::new(),
            grants: Vec::new(),
            audit: Vec::new(),
            technology_content: None,
            merger_verdict: None,
        };
        b.note(
            RuleId::Classification,
            format!("claimed {:?}; evaluated under group {}", p.claimed_novelty, group.number()),
        );
        if p.new_supply_source {
            b.note(
                RuleId::SupplySourceFolded,
                format!("new source of supply evaluated under group {}", group.number()),
            );
        }
        b
    }

    fn push_audit(&mut self, rule: RuleId, gate: Option<GateId>, outcome: Option<GateOutcome>, detail: String) {
        self.audit.push(AuditEntry {
            seq: self.audit.len() as u32 + 1,
            rule,
            basis: rule.basis().to_string(),
            gate,
            outcome,
            detail,
        });
    }

    fn note(&mut self, rule: RuleId, detail: String) {
        self.push_audit(rule, None, None, detail);
    }

    fn gate(&mut self, rule: RuleId, gate: GateId, outcome: GateOutcome, evidence: String) -> GateOutcome {
        self.push_audit(rule, Some(gate), Some(outcome), evidence.clone());
        self.gates.push(GateResult { gate, outcome, evidence });
        outcome
    }

    fn grant(&mut self, rule: RuleId, instrument: Instrument, justified_by: Vec<GateId>, terms: Option<TariffGrantTerms>) {
        self.push_audit(rule, None, None, format!("recommend {instrument:?} (justified by {justified_by:?})"));
        self.grants.push(InstrumentGrant {
            instrument,
            justified_by,
            tariff_terms: terms,
        });
    }

    fn failed_gates(&self) -> Vec<GateId> {
        self.gates
            .iter()
            .filter(|g| g.outcome == GateOutcome::Fail)
            .map(|g| g.gate)
            .collect()
    }

    fn reject(&mut self) {
        let failed = self.failed_gates();
        self.grants.clear();
        self.push_audit(
            RuleId::Rejection,
            None,
            None,
            format!("reject; failing gates {failed:?}"),
        );
        self.grants.push(InstrumentGrant {
            instrument: Instrument::Reject,
            justified_by: failed,
            tariff_terms: None,
        });
    }

    fn finish(mut self, at: DateTime<Utc>) -> Evaluation {
        self.grants.sort_by_key(|g| g.instrument);
        let decision = if self.grants.iter().any(|g| g.instrument == Instrument::Reject) {
            Decision::Reject
        } else {
            Decision::Support
        };
        Evaluation {
            schema_version: EVALUATION_SCHEMA_VERSION,
            evaluation_id: None,
            plan_id: None,
            supersedes: None,
            evaluated_at: at,
            group: self.group.number(),
            claimed_novelty: self.claimed,
            decision,
            gates: self.gates,
            instruments: self.grants,
            technology_content: self.technology_content,
            merger_verdict: self.merger_verdict,
            audit: self.audit,
        }
    }
}

fn expect_group(p: &ProductionPlan, want: Group) -> Result<(), PlanError> {
    let got = classify_plan(p)?;
    if got != want {
        return Err(PlanError::WrongGroup {
            claimed: p.claimed_novelty,
            group: want.number(),
        });
    }
    Ok(())
}

fn pass_fail(ok: bool) -> GateOutcome {
    if ok {
        GateOutcome::Pass
    } else {
        GateOutcome::Fail
    }
}

/// New good: technical feasibility and probable mass-production demand, both
/// attested; on success, credit creation against productive-means collateral.
pub fn evaluate_group1(p: &ProductionPlan) -> Result<Evaluation, PlanError> {
    evaluate_group1_at(p, Utc::now())
}

fn evaluate_group1_at(p: &ProductionPlan, at: DateTime<Utc>) -> Result<Evaluation, PlanError> {
    expect_group(p, Group::NewGood)?;
    let mut b = Builder::new(p, Group::NewGood);
    let feasible = b.gate(
        RuleId::NewGoodFeasibility,
        GateId::TechnicalFeasibility,
        pass_fail(p.feasibility_confirmed),
        format!("feasibility_confirmed = {}", p.feasibility_confirmed),
    );
    let demand = b.gate(
        RuleId::NewGoodDemand,
        GateId::MassProductionDemand,
        pass_fail(p.demand_probable_at_mass_production),
        format!(
            "demand_probable_at_mass_production = {} (analyst attestation, not a computed score)",
            p.demand_probable_at_mass_production
        ),
    );
    if feasible == GateOutcome::Pass && demand == GateOutcome::Pass {
        b.grant(
            RuleId::NewGoodCredit,
            Instrument::CreditCreationWithProductiveMeansCollateral,
            vec![GateId::TechnicalFeasibility, GateId::MassProductionDemand],
            None,
        );
    } else {
        b.reject();
    }
    Ok(b.finish(at))
}

/// New method: gated by technology class, price reduction and the foreign-investment
/// rule. The change in technology content added is reported, never gated on.
pub fn evaluate_group2(p: &ProductionPlan) -> Result<Evaluation, PlanError> {
    evaluate_group2_at(p, Utc::now())
}

fn evaluate_group2_at(p: &ProductionPlan, at: DateTime<Utc>) -> Result<Evaluation, PlanError> {
    expect_group(p, Group::NewMethod)?;
    let profile = p.technology_profile.as_ref().expect("validated");
    let class = p.effective_tech_class().expect("validated");
    let mut b = Builder::new(p, Group::NewMethod);

    let new_tcc = tcc(profile).map_err(|_| PlanError::Invalid(profile.violations()))?;
    let new_tca = tca(new_tcc, profile.eva).expect("tcc in range");
    let (baseline_tca, delta) = match p.baseline_tcc {
        Some(base) => {
            let base_tca = tca(base, profile.eva).expect("validated baseline");
            (Some(base_tca), Some(new_tca - base_tca))
        }
        None => (None, None),
    };
    b.technology_content = Some(TcaEvidence {
        tcc: new_tcc,
        tca: new_tca,
        baseline_tcc: p.baseline_tcc,
        baseline_tca,
        tca_delta: delta,
    });
    b.note(
        RuleId::NewMethodTechnologyContent,
        match delta {
            Some(d) => format!("TCC {new_tcc}, TCA {new_tca}, TCA change vs incumbent {d} (evidence only)"),
            None => format!("TCC {new_tcc}, TCA {new_tca}; no incumbent TCC supplied (evidence only)"),
        },
    );

    let foreign = if p.foreign_investment {
        b.gate(
            RuleId::NewMethodForeignInvestment,
            GateId::ForeignInvestmentTechnology,
            pass_fail(class.is_advanced()),
            format!("foreign investment with {class} technology"),
        )
    } else {
        b.gate(
            RuleId::NewMethodForeignInvestment,
            GateId::ForeignInvestmentTechnology,
            GateOutcome::NotApplicable,
            "domestic investment".into(),
        )
    };

    let (advanced, price) = if class.is_advanced() {
        let adv = b.gate(
            RuleId::NewMethodAdvancedClass,
            GateId::AdvancedTechnologyClass,
            GateOutcome::Pass,
            format!("{class} technology: supported regardless of present economic benefit"),
        );
        let price = b.gate(
            RuleId::NewMethodPriceReduction,
            GateId::PriceReduction,
            GateOutcome::NotApplicable,
            format!("not required for {class} technology"),
        );
        (adv, price)
    } else {
        let adv = b.gate(
            RuleId::NewMethodAdvancedClass,
            GateId::AdvancedTechnologyClass,
            GateOutcome::NotApplicable,
            format!("{class} technology is judged on economic benefit"),
        );
        let price = b.gate(
            RuleId::NewMethodPriceReduction,
            GateId::PriceReduction,
            pass_fail(p.price_reduction_expected),
            format!("price_reduction_expected = {}", p.price_reduction_expected),
        );
        (adv, price)
    };

    if foreign != GateOutcome::Fail && (advanced == GateOutcome::Pass || price == GateOutcome::Pass) {
        let mut why = Vec::new();
        if foreign == GateOutcome::Pass {
            why.push(GateId::ForeignInvestmentTechnology);
        }
        why.push(if advanced == GateOutcome::Pass {
            GateId::AdvancedTechnologyClass
        } else {
            GateId::PriceReduction
        });
        b.grant(
            RuleId::NewMethodSupport,
            Instrument::CreditCreationWithProductiveMeansCollateral,
            why,
            None,
        );
    } else {
        b.reject();
    }
    Ok(b.finish(at))
}

/// New market: instruments follow the market case.
pub fn evaluate_group3(p: &ProductionPlan) -> Result<Evaluation, PlanError> {
    evaluate_group3_at(p, Utc::now())
}

fn evaluate_group3_at(p: &ProductionPlan, at: DateTime<Utc>) -> Result<Evaluation, PlanError> {
    expect_group(p, Group::NewMarket)?;
    let case = p.market_case.expect("validated");
    let mut b = Builder::new(p, Group::NewMarket);
    let terms = |converge: bool| {
        p.tariff_terms.as_ref().map(|t| TariffGrantTerms {
            contract_reference: t.contract_reference.clone(),
            duration_months: t.duration_months,
            converge_to_world_price: converge,
        })
    };
    let why = vec![GateId::MarketCase];
    match case {
        MarketCase::GovernmentProcurement => {
            b.gate(
                RuleId::NewMarketProcurement,
                GateId::MarketCase,
                GateOutcome::Pass,
                "government procurement: demand is a commitment, not a prediction".into(),
            );
            b.grant(
                RuleId::NewMarketProcurement,
                Instrument::GovernmentProcurementContract,
                why.clone(),
                None,
            );
            b.grant(
                RuleId::NewMarketProcurement,
                Instrument::CreditAtMinimumInterest,
                why.clone(),
                None,
            );
            b.grant(
                RuleId::NewMarketProcurement,
                Instrument::TariffByContractTimeLimited,
                why,
                terms(false),
            );
        }
        MarketCase::DomesticGrowthPrediction => {
            b.gate(
                RuleId::NewMarketDomesticGrowth,
                GateId::MarketCase,
                GateOutcome::Pass,
                "domestic growth prediction: import substitution under a mutual contract".into(),
            );
            b.grant(
                RuleId::NewMarketDomesticGrowth,
                Instrument::TariffByContractTimeLimited,
                why,
                terms(true),
            );
        }
        MarketCase::GlobalGrowthPrediction => {
            b.gate(
                RuleId::NewMarketGlobalGrowth,
                GateId::MarketCase,
                GateOutcome::Pass,
                "global growth prediction: export commitments".into(),
            );
            b.grant(
                RuleId::NewMarketGlobalGrowth,
                Instrument::ExportSubsidyOrGuaranteeFund,
                why.clone(),
                None,
            );
            b.grant(
                RuleId::NewMarketGlobalGrowth,
                Instrument::BilateralTradeAgreementFacilitation,
                why,
                None,
            );
        }
    }
    b.note(
        RuleId::NewMarketInvestmentMonitoringUnmodeled,
        "shortage/excess (lumpy) investment is not modeled and not gated".into(),
    );
    Ok(b.finish(at))
}

/// Merger: objectives verified and the concentration screen does not presume
/// enhanced market power.
pub fn evaluate_group4(p: &ProductionPlan) -> Result<Evaluation, PlanError> {
    evaluate_group4_at(p, Utc::now())
}

fn evaluate_group4_at(p: &ProductionPlan, at: DateTime<Utc>) -> Result<Evaluation, PlanError> {
    expect_group(p, Group::Merger)?;
    let scenario = p.merger.as_ref().expect("validated");
    let mut b = Builder::new(p, Group::Merger);
    let objectives = b.gate(
        RuleId::MergerObjectives,
        GateId::ObjectivesVerified,
        pass_fail(p.claimed_objectives_verified),
        format!("claimed_objectives_verified = {}", p.claimed_objectives_verified),
    );
    let verdict = screen(scenario);
    let concentration = b.gate(
        RuleId::MergerConcentration,
        GateId::MarketConcentration,
        pass_fail(verdict.action != MergerAction::PresumedEnhancesMarketPower),
        format!(
            "pre HHI {}, increase {}, post HHI {}: {:?}, {:?}",
            verdict.pre_hhi, verdict.delta_hhi, verdict.post_hhi, verdict.market_class, verdict.action
        ),
    );
    b.merger_verdict = Some(verdict);
    if objectives == GateOutcome::Pass && concentration == GateOutcome::Pass {
        let why = vec![GateId::ObjectivesVerified, GateId::MarketConcentration];
        b.grant(RuleId::MergerSupport, Instrument::DirectSubsidy, why.clone(), None);
        b.grant(RuleId::MergerSupport, Instrument::TaxRelief, why, None);
    } else {
        b.reject();
    }
    Ok(b.finish(at))
}

/// Established industries keep their recommendation only when the plan
/// modernizes production or restructures the organization.
pub fn apply_guardrails(p: &ProductionPlan, mut e: Evaluation) -> Evaluation {
    let (outcome, evidence) = if !p.is_established_industry {
        (GateOutcome::NotApplicable, "not an established industry".to_string())
    } else if p.involves_modernization_or_restructuring {
        (
            GateOutcome::Pass,
            "established industry with modernization or restructuring".to_string(),
        )
    } else {
        (
            GateOutcome::Fail,
            "established industry without modernization or restructuring".to_string(),
        )
    };
    let seq = e.audit.len() as u32 + 1;
    e.audit.push(AuditEntry {
        seq,
        rule: RuleId::EstablishedIndustryGuardrail,
        basis: RuleId::EstablishedIndustryGuardrail.basis().to_string(),
        gate: Some(GateId::EstablishedIndustryRenewal),
        outcome: Some(outcome),
        detail: evidence.clone(),
    });
    e.gates.push(GateResult {
        gate: GateId::EstablishedIndustryRenewal,
        outcome,
        evidence,
    });
    if outcome == GateOutcome::Fail {
        let failed: Vec<GateId> = e
            .gates
            .iter()
            .filter(|g| g.outcome == GateOutcome::Fail)
            .map(|g| g.gate)
            .collect();
        let seq = e.audit.len() as u32 + 1;
        e.audit.push(AuditEntry {
            seq,
            rule: RuleId::Rejection,
            basis: RuleId::Rejection.basis().to_string(),
            gate: None,
            outcome: None,
            detail: format!("guardrail overrides earlier recommendation; failing gates {failed:?}"),
        });
        e.instruments = vec![InstrumentGrant {
            instrument: Instrument::Reject,
            justified_by: failed,
            tariff_terms: None,
        }];
        e.decision = Decision::Reject;
    }
    e
}

/// Classifies, runs the group rules and the guardrail, stamping `at`.
pub fn evaluate_at(p: &ProductionPlan, at: DateTime<Utc>) -> Result<Evaluation, PlanError> {
    let e = match classify_plan(p)? {
        Group::NewGood => evaluate_group1_at(p, at)?,
        Group::NewMethod => evaluate_group2_at(p, at)?,
        Group::NewMarket => evaluate_group3_at(p, at)?,
        Group::Merger => evaluate_group4_at(p, at)?,
    };
    let mut e = apply_guardrails(p, e);
    e.plan_id = p.id.clone();
    Ok(e)
}

pub fn evaluate(p: &ProductionPlan) -> Result<Evaluation, PlanError> {
    evaluate_at(p, Utc::now())
}

/// How import-substitution candidates are scored. Neither formula is normative;
/// they order sectors for an analyst to look at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ImportScoring {
    /// `import_share * U_backward`: imported inputs with strong pull on the system.
    #[default]
    ShareTimesBackwardLinkage,
    /// `import_share * U_forward`.
    ShareTimesForwardLinkage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportCandidate {
    pub sector: usize,
    pub label: String,
    pub score: f64,
    pub import_share: f64,
    pub u_backward: f64,
    pub gi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportSubstitutionRanking {
    pub scoring: ImportScoring,
    pub normative: bool,
    pub candidates: Vec<ImportCandidate>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CandidateError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("import share for sector {sector} is {value}, outside [0, 1]")]
    ShareOutOfRange { sector: usize, value: f64 },
}

/// Sectors with a positive score, best first (ties keep sector order).
pub fn import_substitution_candidates(
    t: &IoTable,
    import_share: &[f64],
    linkage: &LinkageReport,
    gi: &[f64],
    scoring: ImportScoring,
) -> Result<ImportSubstitutionRanking, CandidateError> {
    let n = t.len();
    for (what, len) in [
        ("import_share", import_share.len()),
        ("linkage report", linkage.len()),
        ("gi", gi.len()),
    ] {
        if len != n {
            return Err(CandidateError::Dimension(format!("{what} has {len} sectors, table has {n}")));
        }
    }
    for (i, &s) in import_share.iter().enumerate() {
        if !(0.0..=1.0).contains(&s) {
            return Err(CandidateError::ShareOutOfRange { sector: i + 1, value: s });
        }
    }
    let mut candidates: Vec<ImportCandidate> = (0..n)
        .map(|i| {
            let weight = match scoring {
                ImportScoring::ShareTimesBackwardLinkage => linkage.u_backward[i],
                ImportScoring::ShareTimesForwardLinkage => linkage.u_forward[i],
            };
            ImportCandidate {
                sector: i,
                label: t.sector_labels()[i].clone(),
                score: import_share[i] * weight,
                import_share: import_share[i],
                u_backward: linkage.u_backward[i],
                gi: gi[i],
            }
        })
        .filter(|c| c.score > 0.0)
        .collect();
    candidates.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.sector.cmp(&b.sector)));
    Ok(ImportSubstitutionRanking {
        scoring,
        normative: false,
        candidates,
    })
}

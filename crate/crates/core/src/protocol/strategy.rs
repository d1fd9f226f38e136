use serde::{Deserialize, Serialize};

/// Stance towards the collusion coalition.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoalitionRole {
    /// Neither starts nor joins a coalition.
    #[default]
    Honest,
    /// Ringleader: creates and funds the Colluder's contract.
    Initiate,
    /// Follower: signs the Colluder's contract if asked.
    Accept,
    /// Asked to collude, declines.
    Reject,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportChoice {
    #[default]
    NoReport,
    /// Report, and deliver `y′ = f(x)` in the Traitor's contract.
    ReportCorrect,
    /// Report, and deliver some `y′ ≠ f(x)` there.
    ReportWrong,
}

/// What the cloud delivers to the Prisoner's contract.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CtpAction {
    /// The correct result.
    #[default]
    Fx,
    /// The agreed wrong value `r`.
    R,
    /// A wrong value of the cloud's own, distinct from `f(x)` and `r`.
    Other,
    /// Deliver nothing.
    Withhold,
}

impl CtpAction {
    /// Position in the game action alphabet `{f(x), r, other}`; withholding
    /// counts as `other`.
    pub fn game_index(self) -> usize {
        match self {
            CtpAction::Fx => 0,
            CtpAction::R => 1,
            CtpAction::Other | CtpAction::Withhold => 2,
        }
    }

    pub fn from_game_index(i: usize) -> Self {
        match i {
            0 => CtpAction::Fx,
            1 => CtpAction::R,
            2 => CtpAction::Other,
            _ => panic!("action index {i} out of range"),
        }
    }
}

impl ReportChoice {
    pub fn game_index(self) -> usize {
        match self {
            ReportChoice::NoReport => 0,
            ReportChoice::ReportCorrect => 1,
            ReportChoice::ReportWrong => 2,
        }
    }

    pub fn from_game_index(i: usize) -> Self {
        match i {
            0 => ReportChoice::NoReport,
            1 => ReportChoice::ReportCorrect,
            2 => ReportChoice::ReportWrong,
            _ => panic!("report index {i} out of range"),
        }
    }

    pub fn reports(self) -> bool {
        self != ReportChoice::NoReport
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloudStrategy {
    #[serde(default)]
    pub coalition_role: CoalitionRole,
    #[serde(default)]
    pub report_choice: ReportChoice,
    #[serde(default)]
    pub ctp_action: CtpAction,
}

impl CloudStrategy {
    pub const HONEST: CloudStrategy =
        CloudStrategy { coalition_role: CoalitionRole::Honest, report_choice: ReportChoice::NoReport, ctp_action: CtpAction::Fx };

    pub fn new(coalition_role: CoalitionRole, report_choice: ReportChoice, ctp_action: CtpAction) -> Self {
        CloudStrategy { coalition_role, report_choice, ctp_action }
    }

    pub fn acting(ctp_action: CtpAction) -> Self {
        CloudStrategy { ctp_action, ..Self::HONEST }
    }

    /// Whether the cloud ever has to evaluate `f(x)` itself.
    pub fn computes(self) -> bool {
        self.ctp_action == CtpAction::Fx || self.report_choice == ReportChoice::ReportCorrect
    }
}

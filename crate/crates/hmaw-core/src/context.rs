//! Layer context texts: built-in templates plus caller overrides.
//!
//! The shipped templates live under `contexts/<theme>/<role>.txt` in this
//! crate and are embedded at compile time. Ablated chains that remove the
//! CEO or Manager layer use the variant texts under `contexts/company/
//! drop_ceo/` and `drop_manager/`, which reassign the removed layer's
//! responsibilities. A registry can override any slot with caller-supplied
//! text, which is how the CLI wires in user-edited template files.

use alloc::collections::BTreeMap;
use alloc::string::String;

use crate::chain::ChainError;
use crate::role::{Role, Theme};

/// Which edition of a role's context text applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ContextVariant {
    Standard,
    /// Two-layer company chain with the CEO removed (Manager leads).
    CeoRemoved,
    /// Two-layer company chain with the Manager removed (CEO directs the Worker).
    ManagerRemoved,
}

/// Resolves the context text for a (theme, role, variant) slot.
#[derive(Debug, Clone, Default)]
pub struct ContextRegistry {
    overrides: BTreeMap<(Theme, Role, ContextVariant), String>,
}

impl ContextRegistry {
    /// Registry backed purely by the embedded templates.
    pub fn builtin() -> Self {
        Self::default()
    }

    /// Replace the text for one slot.
    pub fn set(&mut self, theme: Theme, role: Role, variant: ContextVariant, text: impl Into<String>) {
        self.overrides.insert((theme, role, variant), text.into());
    }

    pub fn text(
        &self,
        theme: Theme,
        role: Role,
        variant: ContextVariant,
    ) -> Result<&str, ChainError> {
        if let Some(t) = self.overrides.get(&(theme, role, variant)) {
            return Ok(t.as_str());
        }
        builtin_text(theme, role, variant).ok_or(ChainError::MissingContext { theme, role })
    }
}

/// Default judge prompt. `{{query}}`, `{{response_1}}`, and `{{response_2}}`
/// are substituted at render time.
pub const DEFAULT_JUDGE_TEMPLATE: &str = include_str!("../contexts/evaluator.txt");

fn builtin_text(theme: Theme, role: Role, variant: ContextVariant) -> Option<&'static str> {
    use ContextVariant::*;
    use Role::*;
    use Theme::*;
    let text = match (theme, role, variant) {
        (Company, Ceo, Standard) => include_str!("../contexts/company/ceo.txt"),
        (Company, SeniorVicePresident, Standard) => {
            include_str!("../contexts/company/senior_vice_president.txt")
        }
        (Company, VicePresident, Standard) => {
            include_str!("../contexts/company/vice_president.txt")
        }
        (Company, Director, Standard) => include_str!("../contexts/company/director.txt"),
        (Company, SeniorManager, Standard) => {
            include_str!("../contexts/company/senior_manager.txt")
        }
        (Company, Manager, Standard) => include_str!("../contexts/company/manager.txt"),
        (Company, Supervisor, Standard) => include_str!("../contexts/company/supervisor.txt"),
        (Company, Worker, Standard) => include_str!("../contexts/company/worker.txt"),
        (Company, Manager, CeoRemoved) => {
            include_str!("../contexts/company/drop_ceo/manager.txt")
        }
        (Company, Worker, CeoRemoved) => include_str!("../contexts/company/drop_ceo/worker.txt"),
        (Company, Ceo, ManagerRemoved) => {
            include_str!("../contexts/company/drop_manager/ceo.txt")
        }
        (Company, Worker, ManagerRemoved) => {
            include_str!("../contexts/company/drop_manager/worker.txt")
        }
        (Government, President, Standard) => {
            include_str!("../contexts/government/president.txt")
        }
        (Government, Minister, Standard) => include_str!("../contexts/government/minister.txt"),
        (Government, Officer, Standard) => include_str!("../contexts/government/officer.txt"),
        (University, Dean, Standard) => include_str!("../contexts/university/dean.txt"),
        (University, DepartmentHead, Standard) => {
            include_str!("../contexts/university/department_head.txt")
        }
        (University, Lecturer, Standard) => include_str!("../contexts/university/lecturer.txt"),
        (Temple, Abbot, Standard) => include_str!("../contexts/temple/abbot.txt"),
        (Temple, Prior, Standard) => include_str!("../contexts/temple/prior.txt"),
        (Temple, Monk, Standard) => include_str!("../contexts/temple/monk.txt"),
        _ => return None,
    };
    Some(text)
}

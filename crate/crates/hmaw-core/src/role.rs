//! Organization themes, role vocabulary, and the per-length hierarchy rosters.

use alloc::string::String;
use serde::{Deserialize, Serialize};

use crate::chain::ChainError;

/// Organizational setting a chain is themed after. Every theme has a fixed
/// roster per supported chain length; the company theme is the default and
/// the only one with rosters beyond three layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Theme {
    Company,
    Government,
    University,
    Temple,
}

impl Theme {
    /// All themes, in the canonical reporting order.
    pub const ALL: [Theme; 4] = [
        Theme::Company,
        Theme::Government,
        Theme::University,
        Theme::Temple,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Theme::Company => "company",
            Theme::Government => "government",
            Theme::University => "university",
            Theme::Temple => "temple",
        }
    }

    pub fn parse(s: &str) -> Result<Theme, ChainError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "company" => Ok(Theme::Company),
            "government" => Ok(Theme::Government),
            "university" => Ok(Theme::University),
            "temple" => Ok(Theme::Temple),
            other => Err(ChainError::UnknownTheme(String::from(other))),
        }
    }

    /// Longest chain this theme has a roster for.
    pub fn max_layers(&self) -> usize {
        match self {
            Theme::Company => 6,
            _ => 3,
        }
    }

    /// The ordered roster for a chain of `num_layers` layers. The last role
    /// is always the theme's responder (Worker, Officer, Lecturer, Monk).
    pub fn roster(&self, num_layers: usize) -> Result<&'static [Role], ChainError> {
        use Role::*;
        let roster: &'static [Role] = match (self, num_layers) {
            (Theme::Company, 1) => &[Worker],
            (Theme::Company, 2) => &[Ceo, Worker],
            (Theme::Company, 3) => &[Ceo, Manager, Worker],
            (Theme::Company, 4) => &[Ceo, SeniorManager, Manager, Worker],
            (Theme::Company, 5) => &[Ceo, SeniorManager, Manager, Supervisor, Worker],
            (Theme::Company, 6) => &[
                Ceo,
                SeniorVicePresident,
                VicePresident,
                Director,
                Manager,
                Worker,
            ],
            (Theme::Government, 1) => &[Officer],
            (Theme::Government, 2) => &[President, Officer],
            (Theme::Government, 3) => &[President, Minister, Officer],
            (Theme::University, 1) => &[Lecturer],
            (Theme::University, 2) => &[Dean, Lecturer],
            (Theme::University, 3) => &[Dean, DepartmentHead, Lecturer],
            (Theme::Temple, 1) => &[Monk],
            (Theme::Temple, 2) => &[Abbot, Monk],
            (Theme::Temple, 3) => &[Abbot, Prior, Monk],
            _ => {
                return Err(ChainError::InvalidLayerCount {
                    theme: *self,
                    requested: num_layers,
                    max: self.max_layers(),
                })
            }
        };
        Ok(roster)
    }

    /// The role that answers the user in this theme's default ordering.
    pub fn responder(&self) -> Role {
        match self {
            Theme::Company => Role::Worker,
            Theme::Government => Role::Officer,
            Theme::University => Role::Lecturer,
            Theme::Temple => Role::Monk,
        }
    }
}

impl core::fmt::Display for Theme {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// A named position in a hierarchy roster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    #[serde(rename = "CEO")]
    Ceo,
    #[serde(rename = "Senior Vice President")]
    SeniorVicePresident,
    #[serde(rename = "Vice President")]
    VicePresident,
    Director,
    #[serde(rename = "Senior Manager")]
    SeniorManager,
    Manager,
    Supervisor,
    Worker,
    President,
    Minister,
    Officer,
    Dean,
    #[serde(rename = "Department Head")]
    DepartmentHead,
    Lecturer,
    Abbot,
    Prior,
    Monk,
}

impl Role {
    /// Human-readable title, used in prompt section headers and trace files.
    pub fn title(&self) -> &'static str {
        match self {
            Role::Ceo => "CEO",
            Role::SeniorVicePresident => "Senior Vice President",
            Role::VicePresident => "Vice President",
            Role::Director => "Director",
            Role::SeniorManager => "Senior Manager",
            Role::Manager => "Manager",
            Role::Supervisor => "Supervisor",
            Role::Worker => "Worker",
            Role::President => "President",
            Role::Minister => "Minister",
            Role::Officer => "Officer",
            Role::Dean => "Dean",
            Role::DepartmentHead => "Department Head",
            Role::Lecturer => "Lecturer",
            Role::Abbot => "Abbot",
            Role::Prior => "Prior",
            Role::Monk => "Monk",
        }
    }

    /// Lower-case identifier used for context template file names.
    pub fn slug(&self) -> &'static str {
        match self {
            Role::Ceo => "ceo",
            Role::SeniorVicePresident => "senior_vice_president",
            Role::VicePresident => "vice_president",
            Role::Director => "director",
            Role::SeniorManager => "senior_manager",
            Role::Manager => "manager",
            Role::Supervisor => "supervisor",
            Role::Worker => "worker",
            Role::President => "president",
            Role::Minister => "minister",
            Role::Officer => "officer",
            Role::Dean => "dean",
            Role::DepartmentHead => "department_head",
            Role::Lecturer => "lecturer",
            Role::Abbot => "abbot",
            Role::Prior => "prior",
            Role::Monk => "monk",
        }
    }

    /// Parse a role from its title or slug, case-insensitively.
    pub fn parse(s: &str) -> Option<Role> {
        let norm: String = s
            .trim()
            .chars()
            .filter(|c| !matches!(c, ' ' | '_' | '-'))
            .flat_map(|c| c.to_lowercase())
            .collect();
        const ALL: [Role; 17] = [
            Role::Ceo,
            Role::SeniorVicePresident,
            Role::VicePresident,
            Role::Director,
            Role::SeniorManager,
            Role::Manager,
            Role::Supervisor,
            Role::Worker,
            Role::President,
            Role::Minister,
            Role::Officer,
            Role::Dean,
            Role::DepartmentHead,
            Role::Lecturer,
            Role::Abbot,
            Role::Prior,
            Role::Monk,
        ];
        ALL.into_iter()
            .find(|r| r.slug().replace('_', "") == norm)
    }
}

impl core::fmt::Display for Role {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.title())
    }
}

/// One benchmark item: an id, the user query text, and for objective tasks
/// the gold answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub id: String,
    pub text: String,
    pub gold_answer: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("query `{0}` has empty text")]
    EmptyText(String),
}

impl Query {
    /// Build a query, rejecting text that is empty after trimming.
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Result<Query, QueryError> {
        let id = id.into();
        let text = text.into();
        if text.trim().is_empty() {
            return Err(QueryError::EmptyText(id));
        }
        Ok(Query {
            id,
            text,
            gold_answer: None,
        })
    }

    pub fn with_gold(mut self, gold: impl Into<String>) -> Query {
        self.gold_answer = Some(gold.into());
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn company_rosters_match_hierarchy_tables() {
        use Role::*;
        assert_eq!(Theme::Company.roster(1).unwrap(), &[Worker]);
        assert_eq!(Theme::Company.roster(2).unwrap(), &[Ceo, Worker]);
        assert_eq!(Theme::Company.roster(3).unwrap(), &[Ceo, Manager, Worker]);
        assert_eq!(
            Theme::Company.roster(4).unwrap(),
            &[Ceo, SeniorManager, Manager, Worker]
        );
        assert_eq!(
            Theme::Company.roster(5).unwrap(),
            &[Ceo, SeniorManager, Manager, Supervisor, Worker]
        );
        assert_eq!(
            Theme::Company.roster(6).unwrap(),
            &[Ceo, SeniorVicePresident, VicePresident, Director, Manager, Worker]
        );
    }

    #[test]
    fn alternate_theme_rosters() {
        use Role::*;
        assert_eq!(
            Theme::Government.roster(3).unwrap(),
            &[President, Minister, Officer]
        );
        assert_eq!(
            Theme::University.roster(3).unwrap(),
            &[Dean, DepartmentHead, Lecturer]
        );
        assert_eq!(Theme::Temple.roster(3).unwrap(), &[Abbot, Prior, Monk]);
    }

    #[test]
    fn rosters_end_with_theme_responder() {
        for theme in Theme::ALL {
            for n in 1..=theme.max_layers() {
                let roster = theme.roster(n).unwrap();
                assert_eq!(roster.len(), n);
                assert_eq!(*roster.last().unwrap(), theme.responder());
            }
        }
    }

    #[test]
    fn non_company_themes_reject_long_chains() {
        for theme in [Theme::Government, Theme::University, Theme::Temple] {
            for n in 4..=6 {
                assert!(matches!(
                    theme.roster(n),
                    Err(ChainError::InvalidLayerCount { .. })
                ));
            }
        }
    }

    #[test]
    fn theme_parse_round_trips() {
        for theme in Theme::ALL {
            assert_eq!(Theme::parse(theme.name()).unwrap(), theme);
        }
        assert!(matches!(
            Theme::parse("guild"),
            Err(ChainError::UnknownTheme(_))
        ));
    }

    #[test]
    fn role_parse_accepts_titles_and_slugs() {
        assert_eq!(Role::parse("CEO"), Some(Role::Ceo));
        assert_eq!(Role::parse("senior_vice_president"), Some(Role::SeniorVicePresident));
        assert_eq!(Role::parse("Senior Vice President"), Some(Role::SeniorVicePresident));
        assert_eq!(Role::parse("department-head"), Some(Role::DepartmentHead));
        assert_eq!(Role::parse("janitor"), None);
    }

    #[test]
    fn role_serde_uses_titles() {
        let json = serde_json::to_string(&Role::SeniorVicePresident).unwrap();
        assert_eq!(json, "\"Senior Vice President\"");
        let back: Role = serde_json::from_str(&json).unwrap();
        assert_eq!(back, Role::SeniorVicePresident);
    }

    #[test]
    fn query_requires_non_blank_text() {
        assert!(Query::new("q1", "what is 2+2?").is_ok());
        assert!(matches!(
            Query::new("q2", "   \n\t"),
            Err(QueryError::EmptyText(_))
        ));
    }
}

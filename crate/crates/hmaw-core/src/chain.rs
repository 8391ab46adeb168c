//! Chain configuration and construction.

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::context::{ContextRegistry, ContextVariant};
use crate::role::{Role, Theme};

/// Structural ablations of the default three-layer company chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ablation {
    /// Remove the CEO layer; the Manager directs the Worker.
    DropCeo,
    /// Remove the Manager layer; the CEO directs the Worker.
    DropManager,
    /// Cut the query skip connection into the Manager layer.
    NoSkipManager,
    /// Cut the query skip connection into the Worker layer.
    NoSkipWorker,
    /// Cut both skip connections.
    NoSkips,
}

impl Ablation {
    pub fn parse(s: &str) -> Result<Ablation, ChainError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "drop-ceo" => Ok(Ablation::DropCeo),
            "drop-manager" => Ok(Ablation::DropManager),
            "no-skip-manager" => Ok(Ablation::NoSkipManager),
            "no-skip-worker" => Ok(Ablation::NoSkipWorker),
            "no-skips" => Ok(Ablation::NoSkips),
            other => Err(ChainError::UnknownAblation(String::from(other))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Ablation::DropCeo => "drop-ceo",
            Ablation::DropManager => "drop-manager",
            Ablation::NoSkipManager => "no-skip-manager",
            Ablation::NoSkipWorker => "no-skip-worker",
            Ablation::NoSkips => "no-skips",
        }
    }
}

/// Everything needed to build one chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub theme: Theme,
    pub num_layers: usize,
    #[serde(default)]
    pub reversed: bool,
    /// Per-layer query inclusion. `None` means every layer sees the query.
    /// When given, the list must be one flag per layer and the first flag
    /// must be `true`: the entry layer always sees the query.
    #[serde(default)]
    pub skip_flags: Option<Vec<bool>>,
    #[serde(default)]
    pub ablation: Option<Ablation>,
}

impl ChainConfig {
    /// The default pipeline: a three-layer company chain with both skips.
    pub fn company_default() -> ChainConfig {
        ChainConfig {
            theme: Theme::Company,
            num_layers: 3,
            reversed: false,
            skip_flags: None,
            ablation: None,
        }
    }

    pub fn new(theme: Theme, num_layers: usize) -> ChainConfig {
        ChainConfig {
            theme,
            num_layers,
            reversed: false,
            skip_flags: None,
            ablation: None,
        }
    }

    pub fn reversed(mut self) -> ChainConfig {
        self.reversed = true;
        self
    }

    pub fn with_ablation(mut self, ablation: Ablation) -> ChainConfig {
        self.ablation = Some(ablation);
        self
    }

    pub fn with_skip_flags(mut self, flags: Vec<bool>) -> ChainConfig {
        self.skip_flags = Some(flags);
        self
    }
}

/// One layer of a built chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub role: Role,
    /// The fixed context text prepended to this layer's prompt.
    pub context_text: String,
    /// Whether the original query is concatenated into this layer's prompt.
    /// Always true for the entry layer.
    pub receives_skip: bool,
    /// Whether this layer answers the user rather than instructing the next
    /// layer. Exactly one layer has this set, and it is the last.
    pub is_responder: bool,
    /// Whether this is the first layer (it receives no upstream instruction).
    pub is_entry: bool,
}

/// An ordered, ready-to-run chain of layers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerChain {
    pub theme: Theme,
    pub layers: Vec<LayerSpec>,
    pub reversed: bool,
}

impl LayerChain {
    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn roles(&self) -> Vec<Role> {
        self.layers.iter().map(|l| l.role).collect()
    }

    pub fn responder(&self) -> &LayerSpec {
        self.layers.last().expect("chain has at least one layer")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChainError {
    #[error("{theme} chains support 1..={max} layers, requested {requested}")]
    InvalidLayerCount {
        theme: Theme,
        requested: usize,
        max: usize,
    },
    #[error("ablation `{ablation}` only applies to the non-reversed 3-layer company chain")]
    AblationUnsupportedForChain { ablation: Ablation },
    #[error("unknown theme `{0}`")]
    UnknownTheme(String),
    #[error("unknown ablation `{0}`")]
    UnknownAblation(String),
    #[error("skip_flags has {got} entries for a {expected}-layer chain")]
    SkipFlagsLength { expected: usize, got: usize },
    #[error("the first layer always receives the query; skip_flags[0] must be true")]
    FirstLayerSkipDisabled,
    #[error("no context text for {theme}/{role}")]
    MissingContext { theme: Theme, role: Role },
}

impl core::fmt::Display for Ablation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// Build a runnable chain from a configuration and a context registry.
///
/// Roles come from the theme's roster for the requested length, reversed
/// when asked, with the responder function staying on the last layer.
/// Drop ablations shrink the default company chain to two layers and swap
/// in the adjusted context texts; skip ablations clear the corresponding
/// query flags.
pub fn build_chain(
    config: &ChainConfig,
    contexts: &ContextRegistry,
) -> Result<LayerChain, ChainError> {
    if config.num_layers < 1 || config.num_layers > 6 {
        return Err(ChainError::InvalidLayerCount {
            theme: config.theme,
            requested: config.num_layers,
            max: config.theme.max_layers(),
        });
    }
    let roster = config.theme.roster(config.num_layers)?;

    let mut roles: Vec<Role> = roster.to_vec();
    if config.reversed {
        roles.reverse();
    }

    let mut skips: Vec<bool> = match &config.skip_flags {
        None => alloc::vec![true; config.num_layers],
        Some(flags) => {
            if flags.len() != config.num_layers {
                return Err(ChainError::SkipFlagsLength {
                    expected: config.num_layers,
                    got: flags.len(),
                });
            }
            if !flags[0] {
                return Err(ChainError::FirstLayerSkipDisabled);
            }
            flags.clone()
        }
    };

    let mut variant = ContextVariant::Standard;
    if let Some(ablation) = config.ablation {
        let is_default_chain =
            config.theme == Theme::Company && config.num_layers == 3 && !config.reversed;
        if !is_default_chain {
            return Err(ChainError::AblationUnsupportedForChain { ablation });
        }
        match ablation {
            Ablation::DropCeo => {
                roles = alloc::vec![Role::Manager, Role::Worker];
                skips = alloc::vec![true, skips[2]];
                variant = ContextVariant::CeoRemoved;
            }
            Ablation::DropManager => {
                roles = alloc::vec![Role::Ceo, Role::Worker];
                skips = alloc::vec![true, skips[2]];
                variant = ContextVariant::ManagerRemoved;
            }
            Ablation::NoSkipManager => skips[1] = false,
            Ablation::NoSkipWorker => skips[2] = false,
            Ablation::NoSkips => {
                skips[1] = false;
                skips[2] = false;
            }
        }
    }

    let last = roles.len() - 1;
    let mut layers = Vec::with_capacity(roles.len());
    for (i, role) in roles.iter().enumerate() {
        let context_text = contexts.text(config.theme, *role, variant)?;
        layers.push(LayerSpec {
            role: *role,
            context_text: String::from(context_text),
            receives_skip: if i == 0 { true } else { skips[i] },
            is_responder: i == last,
            is_entry: i == 0,
        });
    }

    Ok(LayerChain {
        theme: config.theme,
        layers,
        reversed: config.reversed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(config: &ChainConfig) -> Result<LayerChain, ChainError> {
        build_chain(config, &ContextRegistry::builtin())
    }

    #[test]
    fn default_company_chain_is_ceo_manager_worker() {
        let chain = build(&ChainConfig::company_default()).unwrap();
        assert_eq!(chain.roles(), [Role::Ceo, Role::Manager, Role::Worker]);
        assert!(chain.layers.iter().all(|l| l.receives_skip));
        assert_eq!(
            chain.layers.iter().filter(|l| l.is_responder).count(),
            1
        );
        assert!(chain.responder().is_responder);
    }

    #[test]
    fn six_layer_company_roster() {
        let chain = build(&ChainConfig::new(Theme::Company, 6)).unwrap();
        assert_eq!(
            chain.roles(),
            [
                Role::Ceo,
                Role::SeniorVicePresident,
                Role::VicePresident,
                Role::Director,
                Role::Manager,
                Role::Worker
            ]
        );
    }

    #[test]
    fn single_layer_chain_is_just_the_responder() {
        let chain = build(&ChainConfig::new(Theme::Company, 1)).unwrap();
        assert_eq!(chain.roles(), [Role::Worker]);
        let layer = &chain.layers[0];
        assert!(layer.is_responder && layer.is_entry && layer.receives_skip);
    }

    #[test]
    fn government_chain_roster() {
        let chain = build(&ChainConfig::new(Theme::Government, 3)).unwrap();
        assert_eq!(
            chain.roles(),
            [Role::President, Role::Minister, Role::Officer]
        );
    }

    #[test]
    fn layer_count_bounds() {
        assert!(matches!(
            build(&ChainConfig::new(Theme::Company, 0)),
            Err(ChainError::InvalidLayerCount { .. })
        ));
        assert!(matches!(
            build(&ChainConfig::new(Theme::Company, 7)),
            Err(ChainError::InvalidLayerCount { .. })
        ));
        assert!(matches!(
            build(&ChainConfig::new(Theme::Temple, 4)),
            Err(ChainError::InvalidLayerCount { .. })
        ));
    }

    #[test]
    fn drop_manager_yields_ceo_worker_with_adjusted_contexts() {
        let chain = build(
            &ChainConfig::company_default().with_ablation(Ablation::DropManager),
        )
        .unwrap();
        assert_eq!(chain.roles(), [Role::Ceo, Role::Worker]);
        assert!(chain.layers[0].context_text.contains("no managerial layer"));
        assert!(chain.layers[1].context_text.contains("no managerial layer"));
    }

    #[test]
    fn drop_ceo_yields_manager_worker() {
        let chain =
            build(&ChainConfig::company_default().with_ablation(Ablation::DropCeo)).unwrap();
        assert_eq!(chain.roles(), [Role::Manager, Role::Worker]);
        assert!(!chain.roles().contains(&Role::Ceo));
    }

    #[test]
    fn skip_ablations_clear_the_right_flags() {
        let cases = [
            (Ablation::NoSkipManager, [true, false, true]),
            (Ablation::NoSkipWorker, [true, true, false]),
            (Ablation::NoSkips, [true, false, false]),
        ];
        for (ablation, expected) in cases {
            let chain = build(&ChainConfig::company_default().with_ablation(ablation)).unwrap();
            let flags: Vec<bool> = chain.layers.iter().map(|l| l.receives_skip).collect();
            assert_eq!(flags, expected, "{ablation}");
        }
    }

    #[test]
    fn ablation_rejected_off_the_default_chain() {
        for config in [
            ChainConfig::new(Theme::Company, 4).with_ablation(Ablation::DropCeo),
            ChainConfig::new(Theme::Government, 3).with_ablation(Ablation::DropManager),
            ChainConfig::company_default()
                .reversed()
                .with_ablation(Ablation::NoSkips),
        ] {
            assert!(matches!(
                build(&config),
                Err(ChainError::AblationUnsupportedForChain { .. })
            ));
        }
    }

    #[test]
    fn reversed_chain_inverts_roles_but_not_functions() {
        let chain = build(&ChainConfig::company_default().reversed()).unwrap();
        assert_eq!(chain.roles(), [Role::Worker, Role::Manager, Role::Ceo]);
        assert!(chain.layers[0].is_entry);
        assert!(chain.layers[2].is_responder);
        assert!(!chain.layers[0].is_responder);
    }

    #[test]
    fn explicit_skip_flags_are_validated() {
        assert!(matches!(
            build(&ChainConfig::company_default().with_skip_flags(alloc::vec![true, false])),
            Err(ChainError::SkipFlagsLength { expected: 3, got: 2 })
        ));
        assert!(matches!(
            build(
                &ChainConfig::company_default().with_skip_flags(alloc::vec![false, true, true])
            ),
            Err(ChainError::FirstLayerSkipDisabled)
        ));
        let chain = build(
            &ChainConfig::company_default().with_skip_flags(alloc::vec![true, false, true]),
        )
        .unwrap();
        let flags: Vec<bool> = chain.layers.iter().map(|l| l.receives_skip).collect();
        assert_eq!(flags, [true, false, true]);
    }

    #[test]
    fn ablation_parse_round_trips() {
        for a in [
            Ablation::DropCeo,
            Ablation::DropManager,
            Ablation::NoSkipManager,
            Ablation::NoSkipWorker,
            Ablation::NoSkips,
        ] {
            assert_eq!(Ablation::parse(a.name()).unwrap(), a);
        }
        assert!(Ablation::parse("drop-worker").is_err());
    }
}

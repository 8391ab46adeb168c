//! Chain configuration files and on-disk context templates.
//!
//! A chain config is a TOML document naming the theme, layer count,
//! reversal, skip flags, ablation, and optional context overrides:
//!
//! ```toml
//! theme = "company"
//! num_layers = 3
//! reversed = false
//! skip_flags = [true, true, true]
//! ablation = "no-skip-worker"
//! contexts_dir = "my-contexts"
//!
//! [context_files]
//! manager = "overrides/manager.txt"
//! ```
//!
//! A contexts directory mirrors the built-in layout: one UTF-8 file per
//! role at `<dir>/<theme>/<role>.txt`, with ablation variants at
//! `<dir>/company/drop_ceo/<role>.txt` and `drop_manager/<role>.txt`.
//! Files that exist override the built-in texts; everything else keeps
//! the defaults.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use hmaw_core::{Ablation, ChainConfig, ChainError, ContextRegistry, ContextVariant, Role, Theme};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path} is not valid TOML: {source}")]
    Toml {
        path: String,
        source: toml::de::Error,
    },
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("unknown role `{0}` in context_files")]
    UnknownRole(String),
    #[error("context file {0} is empty")]
    EmptyContext(String),
}

#[derive(Debug, Deserialize)]
struct ChainConfigFile {
    theme: String,
    num_layers: usize,
    #[serde(default)]
    reversed: bool,
    #[serde(default)]
    skip_flags: Option<Vec<bool>>,
    #[serde(default)]
    ablation: Option<String>,
    #[serde(default)]
    contexts_dir: Option<PathBuf>,
    #[serde(default)]
    context_files: BTreeMap<String, PathBuf>,
}

/// A parsed chain config file with its override paths resolved relative
/// to the file's directory.
#[derive(Debug, Clone)]
pub struct LoadedChainConfig {
    pub config: ChainConfig,
    pub contexts_dir: Option<PathBuf>,
    /// Role slug to template path.
    pub context_files: BTreeMap<String, PathBuf>,
}

fn read_text(path: &Path) -> Result<String, ConfigError> {
    fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn read_context_text(path: &Path) -> Result<String, ConfigError> {
    let text = read_text(path)?;
    if text.trim().is_empty() {
        return Err(ConfigError::EmptyContext(path.display().to_string()));
    }
    Ok(text)
}

/// The context variant a chain with this ablation renders with.
pub fn variant_for(ablation: Option<Ablation>) -> ContextVariant {
    match ablation {
        Some(Ablation::DropCeo) => ContextVariant::CeoRemoved,
        Some(Ablation::DropManager) => ContextVariant::ManagerRemoved,
        _ => ContextVariant::Standard,
    }
}

/// Registry = built-ins overlaid with whatever template files exist in
/// `dir`, which is laid out as `<theme>/<role>.txt`.
pub fn load_context_overrides(dir: &Path) -> Result<ContextRegistry, ConfigError> {
    let mut registry = ContextRegistry::builtin();
    for theme in Theme::ALL {
        for n in 1..=theme.max_layers() {
            for role in theme.roster(n)? {
                let path = dir.join(theme.name()).join(format!("{}.txt", role.slug()));
                if path.is_file() {
                    registry.set(theme, *role, ContextVariant::Standard, read_context_text(&path)?);
                }
            }
        }
    }
    let variants = [
        ("drop_ceo", ContextVariant::CeoRemoved, [Role::Manager, Role::Worker]),
        ("drop_manager", ContextVariant::ManagerRemoved, [Role::Ceo, Role::Worker]),
    ];
    for (subdir, variant, roles) in variants {
        for role in roles {
            let path = dir
                .join("company")
                .join(subdir)
                .join(format!("{}.txt", role.slug()));
            if path.is_file() {
                registry.set(Theme::Company, role, variant, read_context_text(&path)?);
            }
        }
    }
    Ok(registry)
}

/// Build the registry a chain will render with: built-ins, overlaid with
/// a contexts directory, overlaid with per-role files. Per-role files
/// apply to the variant the chain's ablation selects.
pub fn build_registry(
    config: &ChainConfig,
    contexts_dir: Option<&Path>,
    context_files: &BTreeMap<String, PathBuf>,
) -> Result<ContextRegistry, ConfigError> {
    let mut registry = match contexts_dir {
        Some(dir) => load_context_overrides(dir)?,
        None => ContextRegistry::builtin(),
    };
    let variant = variant_for(config.ablation);
    for (role_name, file_path) in context_files {
        let role = Role::parse(role_name)
            .ok_or_else(|| ConfigError::UnknownRole(role_name.clone()))?;
        registry.set(config.theme, role, variant, read_context_text(file_path)?);
    }
    Ok(registry)
}

/// Load a TOML chain config. Paths inside the file resolve relative to
/// the file's directory.
pub fn load_chain_config(path: &Path) -> Result<LoadedChainConfig, ConfigError> {
    let text = read_text(path)?;
    let file: ChainConfigFile = toml::from_str(&text).map_err(|source| ConfigError::Toml {
        path: path.display().to_string(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));

    let theme = Theme::parse(&file.theme)?;
    let ablation = file.ablation.as_deref().map(Ablation::parse).transpose()?;
    let config = ChainConfig {
        theme,
        num_layers: file.num_layers,
        reversed: file.reversed,
        skip_flags: file.skip_flags,
        ablation,
    };

    let mut context_files = BTreeMap::new();
    for (role_name, file_path) in file.context_files {
        let role = Role::parse(&role_name)
            .ok_or_else(|| ConfigError::UnknownRole(role_name.clone()))?;
        context_files.insert(role.slug().to_string(), base.join(file_path));
    }

    Ok(LoadedChainConfig {
        config,
        contexts_dir: file.contexts_dir.map(|d| base.join(d)),
        context_files,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use hmaw_core::build_chain;
    use std::io::Write;

    fn registry_of(loaded: &LoadedChainConfig) -> ContextRegistry {
        build_registry(
            &loaded.config,
            loaded.contexts_dir.as_deref(),
            &loaded.context_files,
        )
        .unwrap()
    }

    #[test]
    fn loads_a_minimal_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("chain.toml");
        fs::write(&path, "theme = \"government\"\nnum_layers = 3\n").unwrap();
        let loaded = load_chain_config(&path).unwrap();
        assert_eq!(loaded.config.theme, Theme::Government);
        assert_eq!(loaded.config.num_layers, 3);
        assert!(!loaded.config.reversed);
        let chain = build_chain(&loaded.config, &registry_of(&loaded)).unwrap();
        assert_eq!(chain.len(), 3);
    }

    #[test]
    fn loads_ablation_and_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("chain.toml");
        fs::write(
            &path,
            "theme = \"company\"\nnum_layers = 3\nablation = \"no-skips\"\n",
        )
        .unwrap();
        let loaded = load_chain_config(&path).unwrap();
        let chain = build_chain(&loaded.config, &registry_of(&loaded)).unwrap();
        let flags: Vec<bool> = chain.layers.iter().map(|l| l.receives_skip).collect();
        assert_eq!(flags, [true, false, false]);
    }

    #[test]
    fn per_role_context_files_override() {
        let dir = tempfile::tempdir().unwrap();
        let mut ctx = fs::File::create(dir.path().join("boss.txt")).unwrap();
        writeln!(ctx, "custom ceo text").unwrap();
        let path = dir.path().join("chain.toml");
        fs::write(
            &path,
            "theme = \"company\"\nnum_layers = 3\n\n[context_files]\nceo = \"boss.txt\"\n",
        )
        .unwrap();
        let loaded = load_chain_config(&path).unwrap();
        let chain = build_chain(&loaded.config, &registry_of(&loaded)).unwrap();
        assert_eq!(chain.layers[0].context_text.trim(), "custom ceo text");
    }

    #[test]
    fn contexts_dir_overrides_by_layout() {
        let dir = tempfile::tempdir().unwrap();
        let temple = dir.path().join("ctx").join("temple");
        fs::create_dir_all(&temple).unwrap();
        fs::write(temple.join("monk.txt"), "custom monk text\n").unwrap();
        let registry = load_context_overrides(&dir.path().join("ctx")).unwrap();
        assert_eq!(
            registry
                .text(Theme::Temple, Role::Monk, ContextVariant::Standard)
                .unwrap()
                .trim(),
            "custom monk text"
        );
        // Untouched slots keep the built-in text.
        assert!(registry
            .text(Theme::Temple, Role::Abbot, ContextVariant::Standard)
            .unwrap()
            .contains("Abbot"));
    }

    #[test]
    fn bad_inputs_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("chain.toml");
        fs::write(&path, "theme = \"guild\"\nnum_layers = 3\n").unwrap();
        assert!(matches!(
            load_chain_config(&path),
            Err(ConfigError::Chain(ChainError::UnknownTheme(_)))
        ));

        fs::write(
            &path,
            "theme = \"company\"\nnum_layers = 3\n\n[context_files]\njanitor = \"x.txt\"\n",
        )
        .unwrap();
        assert!(matches!(
            load_chain_config(&path),
            Err(ConfigError::UnknownRole(r)) if r == "janitor"
        ));

        fs::write(&path, "not toml at all [").unwrap();
        assert!(matches!(load_chain_config(&path), Err(ConfigError::Toml { .. })));
    }
}

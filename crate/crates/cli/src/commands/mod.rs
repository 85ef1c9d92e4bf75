pub mod augment;
pub mod build_index;
pub mod evaluate;
pub mod preview;
pub mod segment;
pub mod synthesize;

use anyhow::Result;

use scribeforge::stackmix::{FragmentIndex, TokenizerBank, DEFAULT_DIMS, DEFAULT_PROBS};

use crate::config::StackMixConfig;

/// Tokenizer bank over the index's lexicons with the configured probabilities.
pub(crate) fn bank_for(index: &FragmentIndex, config: &StackMixConfig) -> Result<TokenizerBank> {
    let dims: Vec<usize> = index.lexicons().iter().map(|l| l.max_dim()).collect();
    let probs = match &config.tokenizer_probs {
        Some(p) => p.clone(),
        None if dims == DEFAULT_DIMS => DEFAULT_PROBS.to_vec(),
        None if dims.is_empty() => return Ok(TokenizerBank::per_character(index.atoms().clone())),
        None => vec![1.0 / dims.len() as f64; dims.len()],
    };
    Ok(index.bank(probs)?)
}

/// Read a UTF-8 corpus, one record per line.
pub(crate) fn read_corpus(path: &std::path::Path) -> Result<Vec<String>> {
    use anyhow::Context as _;
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading corpus {}", path.display()))?;
    Ok(text.lines().map(str::to_string).collect())
}

/// Create the directory that will hold `path`.
pub(crate) fn ensure_parent(path: &std::path::Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(())
}

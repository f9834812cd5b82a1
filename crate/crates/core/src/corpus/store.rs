use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::StoredArticle;
use crate::error::{Error, Result};

/// Append-only JSON-lines file of article states. Later lines for a key
/// supersede earlier ones; [`ArticleLog::compact`] rewrites the file with one
/// line per key.
#[derive(Clone, Debug)]
pub struct ArticleLog {
    path: PathBuf,
}

impl ArticleLog {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        ArticleLog { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Replay the log. A missing file is an empty store.
    pub fn load(&self) -> Result<Vec<StoredArticle>> {
        let file = match File::open(&self.path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e.into()),
        };
        let mut latest: BTreeMap<String, StoredArticle> = BTreeMap::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let article: StoredArticle = serde_json::from_str(&line).map_err(|e| Error::Parse {
                line: i + 1,
                column: e.column(),
                message: format!("{}: {e}", self.path.display()),
            })?;
            latest.insert(article.record.key.clone(), article);
        }
        Ok(latest.into_values().collect())
    }

    pub fn append<'a>(&self, articles: impl IntoIterator<Item = &'a StoredArticle>) -> Result<()> {
        let file = OpenOptions::new().create(true).append(true).open(&self.path)?;
        let mut w = BufWriter::new(file);
        for a in articles {
            serde_json::to_writer(&mut w, a)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn compact<'a>(&self, articles: impl IntoIterator<Item = &'a StoredArticle>) -> Result<()> {
        let tmp = self.path.with_extension("jsonl.tmp");
        {
            let mut w = BufWriter::new(File::create(&tmp)?);
            for a in articles {
                serde_json::to_writer(&mut w, a)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
        fs::rename(&tmp, &self.path)?;
        Ok(())
    }
}

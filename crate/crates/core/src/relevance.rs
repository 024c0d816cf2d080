//! Content relevance over per-document term-frequency tables.
//!
//! Each document is a bag of `n` tokens over `s` distinct terms, giving a
//! semantic mean `p_s = 1/s`. A query covers the summed frequency `c` of its
//! distinct terms found in the document, and scores `R = 1 - exp(-k_U·n)`
//! with `k_U` the divergence between `c` and `p_s`. Coverage below the mean
//! discovers content, coverage above it recovers content, and coverage equal
//! to it is irrelevant (`R = 0`).

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::law::{self, LawError};

#[derive(Debug, Error)]
pub enum RelevanceError {
    #[error("query has no tokens")]
    EmptyQuery,
    #[error("corpus has no documents")]
    EmptyCorpus,
    #[error("duplicate document id '{0}'")]
    DuplicateId(String),
    #[error("document '{id}' has {distinct} distinct terms; at least two are required")]
    Degenerate { id: String, distinct: usize },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: {message}")]
    Invariant { path: String, message: String },
    #[error("{path}: input is not valid UTF-8")]
    Encoding { path: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Law(#[from] LawError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Delimiters {
    #[default]
    #[serde(rename = "ws")]
    Whitespace,
    /// Whitespace and ASCII punctuation.
    #[serde(rename = "ws+punct")]
    WhitespacePunct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    pub delimiters: Delimiters,
}

pub fn tokenize(text: &str, config: &TokenizerConfig) -> Vec<String> {
    let is_delim = |c: char| match config.delimiters {
        Delimiters::Whitespace => c.is_whitespace(),
        Delimiters::WhitespacePunct => c.is_whitespace() || c.is_ascii_punctuation(),
    };
    text.split(is_delim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            if config.lowercase {
                t.to_lowercase()
            } else {
                t.to_owned()
            }
        })
        .collect()
}

/// Same as [`tokenize`] for raw bytes, which must be UTF-8.
pub fn tokenize_bytes(
    bytes: &[u8],
    config: &TokenizerConfig,
    source: &str,
) -> Result<Vec<String>, RelevanceError> {
    let text = std::str::from_utf8(bytes).map_err(|_| RelevanceError::Encoding {
        path: source.to_owned(),
    })?;
    Ok(tokenize(text, config))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RelevanceMode {
    Discovery,
    Recovery,
    Irrelevant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelevanceScore {
    pub relevance: f64,
    pub coverage: f64,
    pub semantic_mean: f64,
    pub mode: RelevanceMode,
}

/// One row of the matrix: term counts of a single document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentIndex {
    doc_id: String,
    term_counts: BTreeMap<String, u64>,
    total_tokens: u64,
}

impl DocumentIndex {
    pub fn from_tokens<I, T>(doc_id: impl Into<String>, tokens: I) -> Result<Self, RelevanceError>
    where
        I: IntoIterator<Item = T>,
        T: Into<String>,
    {
        let mut term_counts = BTreeMap::new();
        let mut total_tokens = 0u64;
        for token in tokens {
            *term_counts.entry(token.into()).or_insert(0u64) += 1;
            total_tokens += 1;
        }
        Self::from_counts(doc_id, term_counts, total_tokens)
    }

    pub fn from_counts(
        doc_id: impl Into<String>,
        term_counts: BTreeMap<String, u64>,
        total_tokens: u64,
    ) -> Result<Self, RelevanceError> {
        let doc_id = doc_id.into();
        if let Some((term, _)) = term_counts.iter().find(|(_, &c)| c == 0) {
            return Err(RelevanceError::Invariant {
                path: format!("documents.{doc_id}.terms.{term}"),
                message: "term counts must be positive".into(),
            });
        }
        let sum: u64 = term_counts.values().sum();
        if sum != total_tokens {
            return Err(RelevanceError::Invariant {
                path: format!("documents.{doc_id}"),
                message: format!("term counts sum to {sum} but n = {total_tokens}"),
            });
        }
        if term_counts.len() < 2 {
            return Err(RelevanceError::Degenerate {
                id: doc_id,
                distinct: term_counts.len(),
            });
        }
        Ok(Self {
            doc_id,
            term_counts,
            total_tokens,
        })
    }

    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn term_counts(&self) -> &BTreeMap<String, u64> {
        &self.term_counts
    }

    /// `n`
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    /// `s`
    pub fn distinct_terms(&self) -> usize {
        self.term_counts.len()
    }

    pub fn semantic_mean(&self) -> f64 {
        1.0 / self.distinct_terms() as f64
    }

    pub fn frequency(&self, term: &str) -> f64 {
        self.term_counts.get(term).copied().unwrap_or(0) as f64 / self.total_tokens as f64
    }

    fn covered_tokens<S: AsRef<str>>(&self, query: &[S]) -> u64 {
        query
            .iter()
            .map(AsRef::as_ref)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .filter_map(|t| self.term_counts.get(t))
            .sum()
    }

    /// Summed frequency of the distinct query terms present in the document.
    pub fn query_coverage<S: AsRef<str>>(&self, query: &[S]) -> f64 {
        self.covered_tokens(query) as f64 / self.total_tokens as f64
    }

    pub fn score<S: AsRef<str>>(&self, query: &[S]) -> Result<RelevanceScore, RelevanceError> {
        if query.is_empty() {
            return Err(RelevanceError::EmptyQuery);
        }
        let covered = self.covered_tokens(query);
        let n = self.total_tokens;
        let s = self.distinct_terms() as u64;
        let coverage = covered as f64 / n as f64;
        let semantic_mean = self.semantic_mean();
        // c ? p_s  <=>  covered·s ? n, compared exactly
        let mode = match (covered as u128 * s as u128).cmp(&(n as u128)) {
            Ordering::Less => RelevanceMode::Discovery,
            Ordering::Greater => RelevanceMode::Recovery,
            Ordering::Equal => RelevanceMode::Irrelevant,
        };
        let relevance = match mode {
            RelevanceMode::Irrelevant => 0.0,
            _ if covered == n => 1.0,
            _ => law::relevance(n as f64, coverage, semantic_mean)?,
        };
        Ok(RelevanceScore {
            relevance,
            coverage,
            semantic_mean,
            mode,
        })
    }
}

/// Per-document term-frequency tables for a corpus, sharing one tokenizer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cqsm {
    tokenizer: TokenizerConfig,
    documents: BTreeMap<String, DocumentIndex>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RankedDocument {
    pub doc_id: String,
    #[serde(flatten)]
    pub score: RelevanceScore,
}

impl Cqsm {
    pub fn build<I, D, T>(docs: I, tokenizer: TokenizerConfig) -> Result<Self, RelevanceError>
    where
        I: IntoIterator<Item = (D, T)>,
        D: Into<String>,
        T: AsRef<str>,
    {
        let mut documents = BTreeMap::new();
        for (id, text) in docs {
            let id = id.into();
            if documents.contains_key(&id) {
                return Err(RelevanceError::DuplicateId(id));
            }
            let index = DocumentIndex::from_tokens(id.clone(), tokenize(text.as_ref(), &tokenizer))?;
            documents.insert(id, index);
        }
        if documents.is_empty() {
            return Err(RelevanceError::EmptyCorpus);
        }
        Ok(Self {
            tokenizer,
            documents,
        })
    }

    pub fn tokenizer(&self) -> &TokenizerConfig {
        &self.tokenizer
    }

    pub fn documents(&self) -> &BTreeMap<String, DocumentIndex> {
        &self.documents
    }

    pub fn document(&self, id: &str) -> Option<&DocumentIndex> {
        self.documents.get(id)
    }

    /// Scores every document against `query`; highest relevance first, ties
    /// by ascending id.
    pub fn rank(&self, query: &str) -> Result<Vec<RankedDocument>, RelevanceError> {
        let tokens = tokenize(query, &self.tokenizer);
        if tokens.is_empty() {
            return Err(RelevanceError::EmptyQuery);
        }
        let mut ranked = self
            .documents
            .values()
            .map(|doc| {
                Ok(RankedDocument {
                    doc_id: doc.doc_id.clone(),
                    score: doc.score(&tokens)?,
                })
            })
            .collect::<Result<Vec<_>, RelevanceError>>()?;
        ranked.sort_by(|a, b| {
            b.score
                .relevance
                .total_cmp(&a.score.relevance)
                .then_with(|| a.doc_id.cmp(&b.doc_id))
        });
        Ok(ranked)
    }

    pub fn to_json(&self) -> String {
        let file = IndexFile {
            tokenizer: self.tokenizer,
            documents: self
                .documents
                .iter()
                .map(|(id, doc)| {
                    (
                        id.clone(),
                        DocumentFile {
                            n: Some(doc.total_tokens),
                            terms: Some(doc.term_counts.clone()),
                        },
                    )
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("index serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, RelevanceError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: IndexFile =
            serde_path_to_error::deserialize(de).map_err(|e| RelevanceError::Schema {
                path: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        let mut documents = BTreeMap::new();
        for (id, doc) in file.documents {
            let n = doc.n.ok_or_else(|| RelevanceError::Schema {
                path: format!("documents.{id}.n"),
                message: "missing field `n`".into(),
            })?;
            let terms = doc.terms.ok_or_else(|| RelevanceError::Schema {
                path: format!("documents.{id}.terms"),
                message: "missing field `terms`".into(),
            })?;
            let index = DocumentIndex::from_counts(id.clone(), terms, n)?;
            documents.insert(id, index);
        }
        if documents.is_empty() {
            return Err(RelevanceError::EmptyCorpus);
        }
        Ok(Self {
            tokenizer: file.tokenizer,
            documents,
        })
    }

    pub fn save(&self, destination: impl AsRef<Path>) -> Result<(), RelevanceError> {
        let path = destination.as_ref();
        fs::write(path, self.to_json()).map_err(|source| RelevanceError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(source: impl AsRef<Path>) -> Result<Self, RelevanceError> {
        let path = source.as_ref();
        let bytes = fs::read(path).map_err(|source| RelevanceError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let text = String::from_utf8(bytes).map_err(|_| RelevanceError::Encoding {
            path: path.display().to_string(),
        })?;
        Self::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IndexFile {
    tokenizer: TokenizerConfig,
    documents: BTreeMap<String, DocumentFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocumentFile {
    #[serde(default)]
    n: Option<u64>,
    #[serde(default)]
    terms: Option<BTreeMap<String, u64>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONTENT: &str = "MYY KY KA PE KY MYY KY KA PE KY MYY KY KA PE KY MYY KY KA PE KY";

    fn content_doc() -> DocumentIndex {
        DocumentIndex::from_tokens("content", tokenize(CONTENT, &TokenizerConfig::default()))
            .unwrap()
    }

    fn q(text: &str) -> Vec<String> {
        tokenize(text, &TokenizerConfig::default())
    }

    #[test]
    fn tokenize_examples() {
        let cfg = TokenizerConfig::default();
        assert_eq!(tokenize("MYY KY KA PE KY", &cfg), ["MYY", "KY", "KA", "PE", "KY"]);
        assert!(tokenize("", &cfg).is_empty());
        assert_eq!(tokenize("a  b", &cfg), ["a", "b"]);
        assert_eq!(tokenize("Hello, world!", &cfg), ["Hello,", "world!"]);
        let punct = TokenizerConfig {
            lowercase: true,
            delimiters: Delimiters::WhitespacePunct,
        };
        assert_eq!(tokenize("Hello, World!", &punct), ["hello", "world"]);
        assert!(tokenize_bytes(&[0xff, 0xfe], &cfg, "bad").is_err());
    }

    #[test]
    fn index_examples() {
        let doc = content_doc();
        assert_eq!(doc.total_tokens(), 20);
        assert_eq!(doc.distinct_terms(), 4);
        assert_eq!(doc.frequency("MYY"), 0.2);
        assert_eq!(doc.frequency("KY"), 0.4);
        assert_eq!(doc.frequency("KA"), 0.2);
        assert_eq!(doc.frequency("PE"), 0.2);
        assert_eq!(doc.semantic_mean(), 0.25);

        assert!(matches!(
            DocumentIndex::from_tokens("x", ["X"]),
            Err(RelevanceError::Degenerate { distinct: 1, .. })
        ));
        let ab = DocumentIndex::from_tokens("ab", ["A", "B"]).unwrap();
        assert_eq!((ab.total_tokens(), ab.distinct_terms()), (2, 2));
        assert_eq!(ab.semantic_mean(), 0.5);
    }

    #[test]
    fn coverage_examples() {
        let doc = content_doc();
        assert!((doc.query_coverage(&q("KY KA PE KY")) - 0.8).abs() < 1e-15);
        assert_eq!(doc.query_coverage(&q("MYY")), 0.2);
        assert_eq!(doc.query_coverage(&q("ZZZ")), 0.0);
    }

    #[test]
    fn score_examples() {
        let doc = content_doc();
        let myy = doc.score(&q("MYY")).unwrap();
        assert!((myy.relevance - 0.1306).abs() <= 5e-4);
        assert_eq!(myy.mode, RelevanceMode::Discovery);
        let ky = doc.score(&q("KY")).unwrap();
        assert!((ky.relevance - 0.6611).abs() <= 5e-4);
        assert_eq!(ky.mode, RelevanceMode::Recovery);
        let multi = doc.score(&q("KY KA PE KY")).unwrap();
        assert!(multi.relevance >= 0.9999);
        assert_eq!(multi.mode, RelevanceMode::Recovery);
        assert!(matches!(
            doc.score::<String>(&[]),
            Err(RelevanceError::EmptyQuery)
        ));
    }

    #[test]
    fn score_boundaries() {
        let doc = content_doc();
        // c = 0: limit 1 - (1 - p_s)^n
        let absent = doc.score(&q("ZZZ")).unwrap();
        assert_eq!(absent.mode, RelevanceMode::Discovery);
        assert!((absent.relevance - (1.0 - 0.75f64.powi(20))).abs() < 1e-12);
        // c = 1: the whole content
        let all = doc.score(&q("MYY KY KA PE")).unwrap();
        assert_eq!(all.relevance, 1.0);
        assert_eq!(all.mode, RelevanceMode::Recovery);
        // c = p_s exactly
        let half = DocumentIndex::from_tokens("c", ["KY", "KA"]).unwrap();
        let s = half.score(&q("KY")).unwrap();
        assert_eq!(s.mode, RelevanceMode::Irrelevant);
        assert_eq!(s.relevance, 0.0);
    }

    #[test]
    fn build_rejects_bad_corpora() {
        let cfg = TokenizerConfig::default();
        assert!(matches!(
            Cqsm::build([("A", CONTENT), ("B", "KY KY")], cfg),
            Err(RelevanceError::Degenerate { .. })
        ));
        assert!(matches!(
            Cqsm::build([("A", CONTENT), ("A", "KY KA")], cfg),
            Err(RelevanceError::DuplicateId(_))
        ));
        assert!(matches!(
            Cqsm::build([("A", "")], cfg),
            Err(RelevanceError::Degenerate { distinct: 0, .. })
        ));
        assert!(matches!(
            Cqsm::build(Vec::<(String, String)>::new(), cfg),
            Err(RelevanceError::EmptyCorpus)
        ));
    }

    #[test]
    fn rank_examples() {
        let cfg = TokenizerConfig::default();
        let corpus = Cqsm::build([("C", "KY KA"), ("A", CONTENT)], cfg).unwrap();
        let ranked = corpus.rank("KY").unwrap();
        assert_eq!(ranked[0].doc_id, "A");
        assert_eq!(ranked[1].doc_id, "C");
        assert_eq!(ranked[1].score.mode, RelevanceMode::Irrelevant);
        assert_eq!(ranked[1].score.relevance, 0.0);
        assert!((ranked[1].score.coverage - 0.5).abs() < 1e-15);

        let single = Cqsm::build([("only", "KY KA KA")], cfg).unwrap();
        assert_eq!(single.rank("nothing").unwrap()[0].doc_id, "only");

        let twins = Cqsm::build([("b", "X Y"), ("a", "X Y")], cfg).unwrap();
        let ids: Vec<_> = twins.rank("Q").unwrap().into_iter().map(|r| r.doc_id).collect();
        assert_eq!(ids, ["a", "b"]);

        assert!(matches!(corpus.rank("   "), Err(RelevanceError::EmptyQuery)));
    }

    #[test]
    fn index_file_round_trip() {
        let corpus = Cqsm::build(
            [("content", CONTENT)],
            TokenizerConfig {
                lowercase: true,
                delimiters: Delimiters::WhitespacePunct,
            },
        )
        .unwrap();
        let back = Cqsm::from_json(&corpus.to_json()).unwrap();
        assert_eq!(back, corpus);
        assert_eq!(back.document("content").unwrap().term_counts()["ky"], 8);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("index.json");
        corpus.save(&path).unwrap();
        assert_eq!(Cqsm::load(&path).unwrap(), corpus);
    }

    #[test]
    fn index_file_errors() {
        let missing_n = r#"{"tokenizer":{"lowercase":false,"delimiters":"ws"},
                            "documents":{"d":{"terms":{"A":1,"B":1}}}}"#;
        match Cqsm::from_json(missing_n).unwrap_err() {
            RelevanceError::Schema { path, .. } => assert_eq!(path, "documents.d.n"),
            other => panic!("unexpected {other:?}"),
        }
        let bad_sum = r#"{"tokenizer":{"lowercase":false,"delimiters":"ws"},
                          "documents":{"d":{"n":5,"terms":{"A":1,"B":1}}}}"#;
        assert!(matches!(
            Cqsm::from_json(bad_sum).unwrap_err(),
            RelevanceError::Invariant { .. }
        ));
        let bad_delims = r#"{"tokenizer":{"lowercase":false,"delimiters":"tabs"},"documents":{}}"#;
        match Cqsm::from_json(bad_delims).unwrap_err() {
            RelevanceError::Schema { path, .. } => assert_eq!(path, "tokenizer.delimiters"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            Cqsm::load("/nonexistent/index.json"),
            Err(RelevanceError::Io { .. })
        ));
    }
}

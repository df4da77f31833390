//! Pre-trained embedding tables.
//!
//! Two on-disk formats are supported:
//!
//! - text: one `token v1 ... vD` line per word, space separated, with an
//!   optional `N D` header line (fastText `.vec` files carry one, GloVe
//!   files do not);
//! - word2vec binary: an ASCII `N D\n` header, then for every word the token
//!   terminated by a single space followed by `D` little-endian `f32`s, and
//!   optionally a newline.
//!
//! Values are stored as `f64` regardless of the source precision.

use std::collections::HashMap;
use std::io::{self, BufRead, ErrorKind, Write};

use crate::measures::VectorSample;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dimension: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
    source_label: String,
    duplicates_dropped: usize,
    skipped_lines: usize,
}

impl EmbeddingTable {
    fn empty(dimension: usize, source_label: &str) -> Self {
        EmbeddingTable {
            dimension,
            words: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
            source_label: source_label.to_owned(),
            duplicates_dropped: 0,
            skipped_lines: 0,
        }
    }

    /// Builds a table from in-memory rows. The dimension is taken from the
    /// first row; duplicate tokens keep their first vector.
    pub fn from_rows<I, S>(source_label: &str, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut table: Option<EmbeddingTable> = None;
        for (i, (word, values)) in rows.into_iter().enumerate() {
            let t = table.get_or_insert_with(|| Self::empty(values.len(), source_label));
            if values.is_empty() || values.len() != t.dimension {
                return Err(Error::InvalidArgument(format!(
                    "row {i}: expected {} components, got {}",
                    t.dimension,
                    values.len()
                )));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("row {i}: non-finite component")));
            }
            let word = word.into();
            if word.is_empty() {
                return Err(Error::InvalidArgument(format!("row {i}: empty token")));
            }
            t.insert(word, &values);
        }
        table.ok_or(Error::EmptyInput("no rows"))
    }

    /// Returns false when `word` was already present.
    fn insert(&mut self, word: String, values: &[f64]) -> bool {
        if self.index.contains_key(&word) {
            self.duplicates_dropped += 1;
            return false;
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.data.extend_from_slice(values);
        true
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn source_label(&self) -> &str {
        &self.source_label
    }

    pub fn set_source_label(&mut self, label: impl Into<String>) {
        self.source_label = label.into();
    }

    pub fn duplicates_dropped(&self) -> usize {
        self.duplicates_dropped
    }

    pub fn skipped_lines(&self) -> usize {
        self.skipped_lines
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index_of(word).map(|i| self.row(i))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// Entries in load order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> + '_ {
        self.words
            .iter()
            .enumerate()
            .map(move |(i, w)| (w.as_str(), self.row(i)))
    }
}

fn parse_header(fields: &[&str]) -> Option<(usize, usize)> {
    match fields {
        [n, d] => Some((n.parse().ok()?, d.parse().ok()?)),
        _ => None,
    }
}

/// Reads the whitespace-separated text format.
///
/// A first line consisting of exactly two integers is treated as an `N D`
/// header. The dimension comes from the first data line; later lines with a
/// different field count are skipped and counted.
pub fn load_text_embeddings<R: BufRead>(
    mut reader: R,
    limit: Option<usize>,
    source_label: &str,
) -> Result<EmbeddingTable> {
    if limit == Some(0) {
        return Err(Error::InvalidArgument("limit must be at least 1".into()));
    }
    let mut table: Option<EmbeddingTable> = None;
    let mut header_dim: Option<(usize, usize)> = None;
    let mut skipped = 0usize;
    let mut seen_content = false;
    let mut buf = Vec::new();
    let mut values = Vec::new();
    let mut line_no = 0usize;

    loop {
        if limit.is_some_and(|k| table.as_ref().map_or(0, |t| t.len()) >= k) {
            break;
        }
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let line = String::from_utf8_lossy(&buf);
        let line = line.trim_end_matches(['\n', '\r']);
        let fields: Vec<&str> = line.split(' ').filter(|f| !f.is_empty()).collect();
        if fields.is_empty() {
            continue;
        }
        let first_content = !seen_content;
        seen_content = true;
        if first_content {
            if let Some((_, d)) = parse_header(&fields) {
                header_dim = Some((line_no, d));
                continue;
            }
        }
        if fields.len() < 2 {
            skipped += 1;
            continue;
        }
        let t = match table.as_mut() {
            Some(t) => t,
            None => {
                let dimension = fields.len() - 1;
                if let Some((header_line, d)) = header_dim {
                    if d != dimension {
                        return Err(Error::Parse {
                            line: line_no,
                            message: format!(
                                "{dimension} values but the header on line {header_line} declares D={d}"
                            ),
                        });
                    }
                }
                table.insert(EmbeddingTable::empty(dimension, source_label))
            }
        };
        if fields.len() != t.dimension + 1 {
            skipped += 1;
            continue;
        }
        values.clear();
        for (col, field) in fields[1..].iter().enumerate() {
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("component {col}: '{field}' is not a finite number"),
                    })
                }
            }
        }
        t.insert(fields[0].to_owned(), &values);
    }

    if !seen_content {
        return Err(Error::EmptyInput("empty embedding stream"));
    }
    let mut table = table.ok_or(Error::EmptyInput("no parseable embedding line"))?;
    table.skipped_lines = skipped;
    Ok(table)
}

/// Writes the text format, optionally with an `N D` header.
pub fn write_text_embeddings<W: Write>(
    table: &EmbeddingTable,
    mut out: W,
    header: bool,
) -> io::Result<()> {
    if header {
        writeln!(out, "{} {}", table.len(), table.dimension())?;
    }
    for (word, row) in table.iter() {
        write!(out, "{word}")?;
        for v in row {
            write!(out, " {v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

struct CountingReader<R> {
    inner: R,
    offset: u64,
}

impl<R: BufRead> CountingReader<R> {
    fn read_until(&mut self, delim: u8, buf: &mut Vec<u8>) -> io::Result<usize> {
        let n = self.inner.read_until(delim, buf)?;
        self.offset += n as u64;
        Ok(n)
    }

    fn read_exact(&mut self, buf: &mut [u8]) -> io::Result<()> {
        self.inner.read_exact(buf)?;
        self.offset += buf.len() as u64;
        Ok(())
    }

    fn skip_if(&mut self, byte: u8) -> io::Result<()> {
        let next = self.inner.fill_buf()?;
        if next.first() == Some(&byte) {
            self.inner.consume(1);
            self.offset += 1;
        }
        Ok(())
    }
}

/// Reads the word2vec binary format.
pub fn load_word2vec_binary<R: BufRead>(
    reader: R,
    limit: Option<usize>,
    source_label: &str,
) -> Result<EmbeddingTable> {
    if limit == Some(0) {
        return Err(Error::InvalidArgument("limit must be at least 1".into()));
    }
    let mut r = CountingReader {
        inner: reader,
        offset: 0,
    };
    let mut header = Vec::new();
    r.read_until(b'\n', &mut header)?;
    if header.is_empty() {
        return Err(Error::EmptyInput("empty word2vec stream"));
    }
    let text = String::from_utf8_lossy(&header);
    let fields: Vec<&str> = text.split_whitespace().collect();
    let (n_words, dimension) = match parse_header(&fields) {
        Some((n, d)) if d > 0 => (n, d),
        _ => {
            return Err(Error::Binary {
                offset: 0,
                message: format!("header '{}' is not two integers 'N D'", text.trim_end()),
            })
        }
    };
    if header.last() != Some(&b'\n') {
        return Err(Error::Truncated {
            offset: r.offset,
            message: "header line not terminated".into(),
        });
    }

    let wanted = limit.map_or(n_words, |k| k.min(n_words));
    let mut table = EmbeddingTable::empty(dimension, source_label);
    let mut token = Vec::new();
    let mut raw = vec![0u8; dimension * 4];
    let mut values = vec![0.0f64; dimension];

    for _ in 0..wanted {
        let token_start = r.offset;
        token.clear();
        r.read_until(b' ', &mut token)?;
        if token.last() != Some(&b' ') {
            return Err(Error::Truncated {
                offset: r.offset,
                message: "stream ended inside a token".into(),
            });
        }
        token.pop();
        let word = String::from_utf8_lossy(&token).into_owned();
        if word.is_empty() {
            return Err(Error::Binary {
                offset: token_start,
                message: "empty token".into(),
            });
        }

        let vector_start = r.offset;
        if let Err(e) = r.read_exact(&mut raw) {
            return Err(if e.kind() == ErrorKind::UnexpectedEof {
                Error::Truncated {
                    offset: vector_start,
                    message: format!("stream ended inside the vector of '{word}'"),
                }
            } else {
                e.into()
            });
        }
        for (i, (chunk, slot)) in raw.chunks_exact(4).zip(values.iter_mut()).enumerate() {
            let v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
            if !v.is_finite() {
                return Err(Error::Binary {
                    offset: vector_start + 4 * i as u64,
                    message: format!("non-finite component {i} of '{word}'"),
                });
            }
            *slot = f64::from(v);
        }
        table.insert(word, &values);
        r.skip_if(b'\n')?;
    }
    Ok(table)
}

/// Writes the word2vec binary format; values are narrowed to `f32`.
pub fn write_word2vec_binary<W: Write>(table: &EmbeddingTable, mut out: W) -> io::Result<()> {
    writeln!(out, "{} {}", table.len(), table.dimension())?;
    for (word, row) in table.iter() {
        out.write_all(word.as_bytes())?;
        out.write_all(b" ")?;
        for &v in row {
            out.write_all(&(v as f32).to_le_bytes())?;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// An averaged word-vector sentence representation.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceVector {
    pub values: Vec<f64>,
    /// Number of in-vocabulary tokens that were averaged.
    pub token_count: usize,
}

impl SentenceVector {
    /// No token was found in the vocabulary; the values are meaningless.
    pub fn is_degenerate(&self) -> bool {
        self.token_count == 0
    }

    /// The vector as a sample, or `None` when degenerate.
    pub fn sample(&self) -> Option<VectorSample<'_>> {
        if self.is_degenerate() {
            return None;
        }
        VectorSample::new(&self.values).ok()
    }
}

/// Component-wise mean of the in-vocabulary token vectors.
///
/// Rows are summed in vocabulary order, so the result does not depend on
/// token order.
pub fn sentence_embed<S: AsRef<str>>(table: &EmbeddingTable, tokens: &[S]) -> SentenceVector {
    let mut rows: Vec<usize> = tokens
        .iter()
        .filter_map(|t| table.index_of(t.as_ref()))
        .collect();
    rows.sort_unstable();
    let mut values = vec![0.0; table.dimension()];
    for &i in &rows {
        for (acc, v) in values.iter_mut().zip(table.row(i)) {
            *acc += v;
        }
    }
    if !rows.is_empty() {
        let count = rows.len() as f64;
        values.iter_mut().for_each(|v| *v /= count);
    }
    SentenceVector {
        values,
        token_count: rows.len(),
    }
}

fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{2018}' | '\u{2019}' | '\u{201C}' | '\u{201D}' | '\u{00AB}' | '\u{00BB}'
                | '\u{2013}' | '\u{2014}' | '\u{2026}' | '\u{00BF}' | '\u{00A1}'
        )
}

/// Splits on Unicode whitespace and strips leading/trailing punctuation from
/// each token; empty tokens are dropped.
pub fn tokenize(text: &str, lowercase: bool) -> Vec<String> {
    text.split_whitespace()
        .map(|t| t.trim_matches(is_punctuation))
        .filter(|t| !t.is_empty())
        .map(|t| if lowercase { t.to_lowercase() } else { t.to_owned() })
        .collect()
}

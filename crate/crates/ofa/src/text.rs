//! Plain-text formats: vocabularies, `.vec` word vectors, external
//! segmentations and coverage bitmaps.
//!
//! Line numbers in errors are 1-based.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ofa_core::{DenseMatrix, Vocabulary, WordVectors};

use crate::error::{Error, Result, ResultExt};

fn numbered_lines<R: BufRead>(r: R) -> impl Iterator<Item = Result<(usize, String)>> {
    r.lines().enumerate().map(|(i, line)| match line {
        Ok(l) => Ok((i + 1, l)),
        Err(e) if e.kind() == io::ErrorKind::InvalidData => Err(Error::parse(i + 1, "invalid UTF-8")),
        Err(e) => Err(e.into()),
    })
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).in_file(path)?))
}

/// One token per line; line `i` becomes index `i - 1`.
pub fn read_vocab<R: BufRead>(r: R) -> Result<Vocabulary> {
    let mut vocab = Vocabulary::default();
    for line in numbered_lines(r) {
        let (line_no, token) = line?;
        if let Err(ofa_core::Error::DuplicateToken { token, first, .. }) = vocab.push(token) {
            return Err(Error::parse(
                line_no,
                format!("duplicate token {token:?} (first seen on line {})", first + 1),
            ));
        }
    }
    Ok(vocab)
}

pub fn write_vocab<W: Write>(vocab: &Vocabulary, mut w: W) -> Result<()> {
    for token in vocab.iter() {
        w.write_all(token.as_bytes())?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_vocab(path: &Path) -> Result<Vocabulary> {
    read_vocab(open(path)?).in_file(path)
}

pub fn save_vocab(vocab: &Vocabulary, path: &Path) -> Result<()> {
    let f = File::create(path).in_file(path)?;
    write_vocab(vocab, BufWriter::new(f)).in_file(path)
}

/// `.vec` text format: a header `N d_w`, then `N` lines `word v1 … v_{d_w}`.
pub fn read_word_vectors<R: BufRead>(r: R) -> Result<WordVectors> {
    let mut lines = numbered_lines(r);
    let (n, dim) = match lines.next() {
        None => return Err(Error::parse(1, "missing header \"N d_w\"")),
        Some(line) => {
            let (line_no, header) = line?;
            let fields: Vec<&str> = header.split_ascii_whitespace().collect();
            match fields.as_slice() {
                [n, d] => {
                    let n: usize = n.parse().map_err(|_| Error::parse(line_no, format!("bad word count {n:?}")))?;
                    let d: usize = d.parse().map_err(|_| Error::parse(line_no, format!("bad dimension {d:?}")))?;
                    (n, d)
                }
                _ => return Err(Error::parse(line_no, "header must be \"N d_w\"")),
            }
        }
    };

    let mut vocab = Vocabulary::default();
    let mut word_lines = Vec::new();
    let mut data = Vec::with_capacity(n.saturating_mul(dim).min(1 << 28));
    for line in lines {
        let (line_no, text) = line?;
        let mut fields = text.split(' ').filter(|f| !f.is_empty());
        let Some(word) = fields.next() else { continue };
        if vocab.len() == n {
            return Err(Error::parse(line_no, format!("more than the {n} rows declared in the header")));
        }
        let before = data.len();
        for field in fields {
            let v: f32 = field
                .parse()
                .map_err(|_| Error::parse(line_no, format!("unparsable float {field:?}")))?;
            if !v.is_finite() {
                return Err(Error::parse(line_no, format!("non-finite value {field:?}")));
            }
            data.push(v);
        }
        let found = data.len() - before;
        if found != dim {
            return Err(Error::parse(
                line_no,
                format!("word {word:?} has {found} values, header declares {dim}"),
            ));
        }
        if let Err(ofa_core::Error::DuplicateToken { token, first, .. }) = vocab.push(word.to_owned()) {
            return Err(Error::parse(
                line_no,
                format!("duplicate word {token:?} (first seen on line {})", word_lines[first]),
            ));
        }
        word_lines.push(line_no);
    }
    if vocab.len() != n {
        return Err(Error::parse(
            vocab.len() + 2,
            format!("header declares {n} rows, found {}", vocab.len()),
        ));
    }
    Ok(WordVectors::new(vocab, DenseMatrix::new(n, dim, data)?)?)
}

pub fn write_word_vectors<W: Write>(wv: &WordVectors, mut w: W) -> Result<()> {
    writeln!(w, "{} {}", wv.len(), wv.dim())?;
    for (i, word) in wv.vocab().iter().enumerate() {
        w.write_all(word.as_bytes())?;
        for v in wv.matrix().row(i) {
            write!(w, " {v}")?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_word_vectors(path: &Path) -> Result<WordVectors> {
    read_word_vectors(open(path)?).in_file(path)
}

pub fn save_word_vectors(wv: &WordVectors, path: &Path) -> Result<()> {
    let f = File::create(path).in_file(path)?;
    write_word_vectors(wv, BufWriter::new(f)).in_file(path)
}

/// `word<TAB>piece piece …` per line. Later lines for the same word replace
/// earlier ones; blank lines are ignored.
pub fn read_segmentations<R: BufRead>(r: R) -> Result<HashMap<String, Vec<String>>> {
    let mut out = HashMap::new();
    for line in numbered_lines(r) {
        let (line_no, text) = line?;
        if text.is_empty() {
            continue;
        }
        let Some((word, pieces)) = text.split_once('\t') else {
            return Err(Error::parse(line_no, "expected \"word<TAB>pieces\""));
        };
        if word.is_empty() {
            return Err(Error::parse(line_no, "empty word"));
        }
        let pieces = pieces.split(' ').filter(|p| !p.is_empty()).map(str::to_owned).collect();
        out.insert(word.to_owned(), pieces);
    }
    Ok(out)
}

pub fn load_segmentations(path: &Path) -> Result<HashMap<String, Vec<String>>> {
    read_segmentations(open(path)?).in_file(path)
}

/// Coverage sidecar: one `0` or `1` per line, aligned with vocabulary order.
pub fn write_coverage<W: Write>(covered: &[bool], mut w: W) -> Result<()> {
    for &c in covered {
        w.write_all(if c { b"1\n" } else { b"0\n" })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_coverage<R: BufRead>(r: R) -> Result<Vec<bool>> {
    numbered_lines(r)
        .map(|line| {
            let (line_no, text) = line?;
            match text.as_str() {
                "1" => Ok(true),
                "0" => Ok(false),
                other => Err(Error::parse(line_no, format!("expected 0 or 1, found {other:?}"))),
            }
        })
        .collect()
}

pub fn save_coverage(covered: &[bool], path: &Path) -> Result<()> {
    let f = File::create(path).in_file(path)?;
    write_coverage(covered, BufWriter::new(f)).in_file(path)
}

pub fn load_coverage(path: &Path) -> Result<Vec<bool>> {
    read_coverage(open(path)?).in_file(path)
}

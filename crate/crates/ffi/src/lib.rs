//! C ABI over the framescope library.
//!
//! Every fallible function returns an [`FsStatus`]; on failure the message is
//! available from [`fs_last_error_message`] on the same thread. Objects are
//! opaque handles owned by the caller and released with the matching
//! `*_free` function. Panics are caught at the boundary and reported as
//! [`FsStatus::Panic`].

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use framescope::corpus::{self, CollectionRules, Corpus};
use framescope::frames::{self, ContingencyMatrix, FrameLexicon};
use framescope::stats;
use framescope::textprep::PrepConfig;
use framescope::topicmodel::{self, LdaConfig, LdaModel};
use framescope::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    InvalidArgument = 5,
    Degenerate = 6,
    Panic = 7,
}

/// Frame coverage of one lexicon over a corpus.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FsCoverage {
    pub total: usize,
    pub n_matched: usize,
    /// `n_matched / total`, a fraction in [0, 1].
    pub pct: f64,
    pub n_multi: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FsCochran {
    pub q: f64,
    pub df: usize,
    pub p: f64,
    pub usable_rows: usize,
}

pub struct FsCorpus(Corpus);
pub struct FsLexicon(FrameLexicon);
pub struct FsModel(LdaModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> FsStatus {
    match err {
        Error::Io { .. } => FsStatus::Io,
        Error::MalformedRecords { .. }
        | Error::Corrupt { .. }
        | Error::VersionMismatch { .. }
        | Error::Json(_) => FsStatus::Parse,
        Error::EmptyInput(_) | Error::Degenerate(_) => FsStatus::Degenerate,
        _ => FsStatus::InvalidArgument,
    }
}

struct Failure(FsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

type FfiResult = Result<(), Failure>;

fn guard(f: impl FnOnce() -> FfiResult) -> FsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FsStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            FsStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(FsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(FsStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, what).map(Some)
    }
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> FfiResult {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a JSONL record file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fs_corpus_load(path: *const c_char, out: *mut *mut FsCorpus) -> FsStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let loaded = corpus::load_corpus(path)?;
        put(out, FsCorpus(loaded.corpus))
    })
}

/// Number of records in the corpus; 0 for NULL.
///
/// # Safety
/// `c` must be NULL or a live corpus handle.
#[no_mangle]
pub unsafe extern "C" fn fs_corpus_len(c: *const FsCorpus) -> usize {
    c.as_ref().map_or(0, |c| c.0.len())
}

/// Applies the collection rules into a new corpus. `tags` is a
/// comma-separated hashtag list (NULL for the default set); `lang` may be
/// NULL to keep every language.
///
/// # Safety
/// `c` must be a live handle; string arguments NULL or NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn fs_corpus_apply_rules(
    c: *const FsCorpus,
    tags: *const c_char,
    lang: *const c_char,
    out: *mut *mut FsCorpus,
) -> FsStatus {
    guard(|| {
        let c = handle(c, "corpus")?;
        let mut rules = CollectionRules::standard();
        if let Some(tags) = opt_str_arg(tags, "tags")? {
            rules.hashtags = tags
                .split(',')
                .map(|t| t.trim().trim_start_matches('#').to_lowercase())
                .filter(|t| !t.is_empty())
                .collect::<BTreeSet<_>>();
        }
        rules.lang = opt_str_arg(lang, "lang")?.map(str::to_owned);
        let filtered = corpus::apply_collection_rules(&c.0, &rules)?;
        put(out, FsCorpus(filtered))
    })
}

/// # Safety
/// `c` must be a live handle and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn fs_corpus_save(c: *const FsCorpus, path: *const c_char) -> FsStatus {
    guard(|| {
        let c = handle(c, "corpus")?;
        corpus::write_corpus(&c.0, str_arg(path, "path")?)?;
        Ok(())
    })
}

/// # Safety
/// `c` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fs_corpus_free(c: *mut FsCorpus) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// One of the bundled frame lexicons by name, e.g. "war".
///
/// # Safety
/// `name` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fs_lexicon_builtin(name: *const c_char, out: *mut *mut FsLexicon) -> FsStatus {
    guard(|| {
        let lex = FrameLexicon::builtin(str_arg(name, "name")?)?;
        put(out, FsLexicon(lex))
    })
}

/// Loads a lexicon file, one entry per line.
///
/// # Safety
/// `path` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fs_lexicon_load(path: *const c_char, out: *mut *mut FsLexicon) -> FsStatus {
    guard(|| {
        let lex = FrameLexicon::load(str_arg(path, "path")?)?;
        put(out, FsLexicon(lex))
    })
}

/// # Safety
/// `lex` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_lexicon_len(lex: *const FsLexicon) -> usize {
    lex.as_ref().map_or(0, |l| l.0.len())
}

/// # Safety
/// `lex` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fs_lexicon_free(lex: *mut FsLexicon) {
    if !lex.is_null() {
        drop(Box::from_raw(lex));
    }
}

/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fs_coverage(
    c: *const FsCorpus,
    lex: *const FsLexicon,
    out: *mut FsCoverage,
) -> FsStatus {
    guard(|| {
        let c = handle(c, "corpus")?;
        let lex = handle(lex, "lexicon")?;
        let out = out.as_mut().ok_or_else(|| null("output pointer"))?;
        let cov = frames::coverage(&c.0, &lex.0)?;
        *out = FsCoverage {
            total: cov.total,
            n_matched: cov.n_matched,
            pct: cov.pct,
            n_multi: cov.n_multi,
        };
        Ok(())
    })
}

/// Trains a model with the bundled preprocessing lists. `passes` of 0 keeps
/// the default.
///
/// # Safety
/// `c` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fs_model_train(
    c: *const FsCorpus,
    topics: usize,
    passes: usize,
    seed: u64,
    out: *mut *mut FsModel,
) -> FsStatus {
    guard(|| {
        let c = handle(c, "corpus")?;
        let prepared = PrepConfig::default().prepare(c.0.iter().map(|t| t.text.as_str()))?;
        let mut cfg = LdaConfig::new(topics).with_seed(seed);
        if passes > 0 {
            cfg.passes = passes;
        }
        let model = topicmodel::train(&prepared.bags, &prepared.vocab, &cfg)?;
        put(out, FsModel(model))
    })
}

/// # Safety
/// `path` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fs_model_load(path: *const c_char, out: *mut *mut FsModel) -> FsStatus {
    guard(|| {
        let model = LdaModel::load(str_arg(path, "path")?)?;
        put(out, FsModel(model))
    })
}

/// # Safety
/// `m` must be a live handle and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn fs_model_save(m: *const FsModel, path: *const c_char) -> FsStatus {
    guard(|| {
        handle(m, "model")?.0.save(str_arg(path, "path")?)?;
        Ok(())
    })
}

/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_model_num_topics(m: *const FsModel) -> usize {
    m.as_ref().map_or(0, |m| m.0.num_topics())
}

/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_model_vocab_size(m: *const FsModel) -> usize {
    m.as_ref().map_or(0, |m| m.0.vocab_size())
}

/// Infers the topic mixture of `text` into `theta`, which must hold exactly
/// `fs_model_num_topics` doubles. `empty` (optional) is set to 1 when no
/// token of the text is in the vocabulary.
///
/// # Safety
/// `m` live; `text` NUL-terminated; `theta` valid for `len` writes; `empty`
/// NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn fs_model_infer(
    m: *const FsModel,
    text: *const c_char,
    theta: *mut f64,
    len: usize,
    empty: *mut u8,
) -> FsStatus {
    guard(|| {
        let m = handle(m, "model")?;
        let text = str_arg(text, "text")?;
        if theta.is_null() {
            return Err(null("theta"));
        }
        if len != m.0.num_topics() {
            return Err(Failure(
                FsStatus::InvalidArgument,
                format!("theta holds {len} values, model has {} topics", m.0.num_topics()),
            ));
        }
        let inference = m.0.infer(&PrepConfig::default().preprocess(text));
        std::slice::from_raw_parts_mut(theta, len).copy_from_slice(&inference.theta);
        if let Some(flag) = empty.as_mut() {
            *flag = u8::from(inference.empty);
        }
        Ok(())
    })
}

/// # Safety
/// `m` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fs_model_free(m: *mut FsModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Cochran's Q over a row-major `rows` x `cols` matrix of 0/1 cells.
///
/// # Safety
/// `cells` must be valid for `rows * cols` reads; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fs_cochran_q(
    cells: *const u8,
    rows: usize,
    cols: usize,
    out: *mut FsCochran,
) -> FsStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("output pointer"))?;
        let n = rows
            .checked_mul(cols)
            .ok_or_else(|| Failure(FsStatus::InvalidArgument, "matrix too large".into()))?;
        if cells.is_null() && n > 0 {
            return Err(null("cells"));
        }
        let flat: &[u8] = if n == 0 { &[] } else { std::slice::from_raw_parts(cells, n) };
        let row_vecs: Vec<Vec<u8>> = flat.chunks(cols.max(1)).map(<[u8]>::to_vec).collect();
        let names = (1..=cols).map(|j| format!("frame{j}")).collect();
        let matrix = ContingencyMatrix::from_rows(names, &row_vecs)?;
        let r = stats::cochran_q(&matrix)?;
        *out = FsCochran {
            q: r.q,
            df: r.df,
            p: r.p,
            usable_rows: r.usable_rows,
        };
        Ok(())
    })
}

/// Upper tail of the chi-square distribution; NaN for invalid arguments.
#[no_mangle]
pub extern "C" fn fs_chi2_sf(x: f64, df: usize) -> f64 {
    if df == 0 {
        return f64::NAN;
    }
    catch_unwind(|| stats::chi2_sf(x, df)).unwrap_or(f64::NAN)
}

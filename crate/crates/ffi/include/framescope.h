#ifndef FRAMESCOPE_H
#define FRAMESCOPE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FsStatus {
  FS_STATUS_OK = 0,
  FS_STATUS_NULL_POINTER = 1,
  FS_STATUS_INVALID_UTF8 = 2,
  FS_STATUS_IO = 3,
  FS_STATUS_PARSE = 4,
  FS_STATUS_INVALID_ARGUMENT = 5,
  FS_STATUS_DEGENERATE = 6,
  FS_STATUS_PANIC = 7,
} FsStatus;

typedef struct FsCorpus FsCorpus;

typedef struct FsLexicon FsLexicon;

typedef struct FsModel FsModel;

/**
 * Frame coverage of one lexicon over a corpus.
 */
typedef struct FsCoverage {
  size_t total;
  size_t n_matched;
  /**
   * `n_matched / total`, a fraction in [0, 1].
   */
  double pct;
  size_t n_multi;
} FsCoverage;

typedef struct FsCochran {
  double q;
  size_t df;
  double p;
  size_t usable_rows;
} FsCochran;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *fs_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *fs_version(void);

/**
 * Loads a JSONL record file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum FsStatus fs_corpus_load(const char *path, struct FsCorpus **out);

/**
 * Number of records in the corpus; 0 for NULL.
 *
 * # Safety
 * `c` must be NULL or a live corpus handle.
 */
size_t fs_corpus_len(const struct FsCorpus *c);

/**
 * Applies the collection rules into a new corpus. `tags` is a
 * comma-separated hashtag list (NULL for the default set); `lang` may be
 * NULL to keep every language.
 *
 * # Safety
 * `c` must be a live handle; string arguments NULL or NUL-terminated.
 */
enum FsStatus fs_corpus_apply_rules(const struct FsCorpus *c,
                                    const char *tags,
                                    const char *lang,
                                    struct FsCorpus **out);

/**
 * # Safety
 * `c` must be a live handle and `path` NUL-terminated.
 */
enum FsStatus fs_corpus_save(const struct FsCorpus *c, const char *path);

/**
 * # Safety
 * `c` must be NULL or a handle not yet freed.
 */
void fs_corpus_free(struct FsCorpus *c);

/**
 * One of the bundled frame lexicons by name, e.g. "war".
 *
 * # Safety
 * `name` must be NUL-terminated; `out` writable.
 */
enum FsStatus fs_lexicon_builtin(const char *name, struct FsLexicon **out);

/**
 * Loads a lexicon file, one entry per line.
 *
 * # Safety
 * `path` must be NUL-terminated; `out` writable.
 */
enum FsStatus fs_lexicon_load(const char *path, struct FsLexicon **out);

/**
 * # Safety
 * `lex` must be NULL or a live handle.
 */
size_t fs_lexicon_len(const struct FsLexicon *lex);

/**
 * # Safety
 * `lex` must be NULL or a handle not yet freed.
 */
void fs_lexicon_free(struct FsLexicon *lex);

/**
 * # Safety
 * Handles must be live; `out` writable.
 */
enum FsStatus fs_coverage(const struct FsCorpus *c,
                          const struct FsLexicon *lex,
                          struct FsCoverage *out);

/**
 * Trains a model with the bundled preprocessing lists. `passes` of 0 keeps
 * the default.
 *
 * # Safety
 * `c` must be a live handle; `out` writable.
 */
enum FsStatus fs_model_train(const struct FsCorpus *c,
                             size_t topics,
                             size_t passes,
                             uint64_t seed,
                             struct FsModel **out);

/**
 * # Safety
 * `path` must be NUL-terminated; `out` writable.
 */
enum FsStatus fs_model_load(const char *path, struct FsModel **out);

/**
 * # Safety
 * `m` must be a live handle and `path` NUL-terminated.
 */
enum FsStatus fs_model_save(const struct FsModel *m, const char *path);

/**
 * # Safety
 * `m` must be NULL or a live handle.
 */
size_t fs_model_num_topics(const struct FsModel *m);

/**
 * # Safety
 * `m` must be NULL or a live handle.
 */
size_t fs_model_vocab_size(const struct FsModel *m);

/**
 * Infers the topic mixture of `text` into `theta`, which must hold exactly
 * `fs_model_num_topics` doubles. `empty` (optional) is set to 1 when no
 * token of the text is in the vocabulary.
 *
 * # Safety
 * `m` live; `text` NUL-terminated; `theta` valid for `len` writes; `empty`
 * NULL or writable.
 */
enum FsStatus fs_model_infer(const struct FsModel *m,
                             const char *text,
                             double *theta,
                             size_t len,
                             uint8_t *empty);

/**
 * # Safety
 * `m` must be NULL or a handle not yet freed.
 */
void fs_model_free(struct FsModel *m);

/**
 * Cochran's Q over a row-major `rows` x `cols` matrix of 0/1 cells.
 *
 * # Safety
 * `cells` must be valid for `rows * cols` reads; `out` writable.
 */
enum FsStatus fs_cochran_q(const uint8_t *cells, size_t rows, size_t cols, struct FsCochran *out);

/**
 * Upper tail of the chi-square distribution; NaN for invalid arguments.
 */
double fs_chi2_sf(double x, size_t df);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRAMESCOPE_H */

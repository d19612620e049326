#ifndef BIBLIOFORGE_H
#define BIBLIOFORGE_H

#include <stddef.h>
#include <stdint.h>

typedef enum BfStatus {
  BF_STATUS_OK = 0,
  BF_STATUS_NULL_POINTER = 1,
  BF_STATUS_INVALID_UTF8 = 2,
  BF_STATUS_IO = 3,
  BF_STATUS_PARSE = 4,
  BF_STATUS_NOT_FOUND = 5,
  BF_STATUS_INVALID_ARGUMENT = 6,
  BF_STATUS_INTERNAL = 7,
} BfStatus;

typedef enum BfAction {
  BF_ACTION_VIEW = 0,
  BF_ACTION_DOWNLOAD = 1,
} BfAction;

typedef struct BfGraph BfGraph;

typedef struct BfJournalKb BfJournalKb;

typedef struct BfRecordStore BfRecordStore;

typedef struct BfTaxonomy BfTaxonomy;

typedef struct BfUsageLog BfUsageLog;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, static; never free it.
const char *bf_version(void);

// Message of the last failed call on this thread, empty after a
// success. Valid until the next call on the same thread.
const char *bf_last_error(void);

// # Safety
// `s` must come from this library and not have been freed; null is ignored.
void bf_string_free(char *s);

// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum BfStatus bf_taxonomy_load(const char *path, struct BfTaxonomy **out);

// # Safety
// `tax` must come from `bf_taxonomy_load`; null is ignored.
void bf_taxonomy_free(struct BfTaxonomy *tax);

// Number of terms, composites included.
//
// # Safety
// `tax` must be a live handle and `out` writable.
enum BfStatus bf_taxonomy_len(const struct BfTaxonomy *tax, size_t *out);

// Keyword report, one `term_id\tlabel\toccurrence` row per keyword.
//
// # Safety
// `tax` must be a live handle, `text` NUL-terminated and `out` writable.
enum BfStatus bf_keywords_tsv(const struct BfTaxonomy *tax,
                              const char *text,
                              size_t max,
                              char **out);

// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum BfStatus bf_kb_load(const char *path, struct BfJournalKb **out);

// # Safety
// `kb` must come from `bf_kb_load`; null is ignored.
void bf_kb_free(struct BfJournalKb *kb);

// Canonical title for a journal alias; `BF_STATUS_NOT_FOUND` when the
// alias is unknown.
//
// # Safety
// `kb` must be a live handle, `alias` NUL-terminated and `out` writable.
enum BfStatus bf_kb_normalize(const struct BfJournalKb *kb, const char *alias, char **out);

// One `marker\tjournal\tvolume\tpage\tyear\treports\turl` row.
//
// # Safety
// `kb` must be a live handle, `raw` NUL-terminated and `out` writable.
enum BfStatus bf_parse_entry_tsv(const struct BfJournalKb *kb, const char *raw, char **out);

// Locates, segments and parses the references of a full text; one
// row per entry, shaped as in [`bf_parse_entry_tsv`].
//
// # Safety
// `kb` must be a live handle, `fulltext` NUL-terminated and `out` writable.
enum BfStatus bf_extract_references_tsv(const struct BfJournalKb *kb,
                                        const char *fulltext,
                                        char **out);

// # Safety
// `dir` must be a NUL-terminated string and `out` writable.
enum BfStatus bf_store_open(const char *dir, struct BfRecordStore **out);

// # Safety
// `store` must come from `bf_store_open`; null is ignored.
void bf_store_free(struct BfRecordStore *store);

// # Safety
// `store` must be a live handle and `out` writable.
enum BfStatus bf_store_len(const struct BfRecordStore *store, size_t *out);

// # Safety
// `out` must be writable.
enum BfStatus bf_graph_new(struct BfGraph **out);

// Citation graph of every record in the store, from stored references.
//
// # Safety
// `store` must be a live handle and `out` writable.
enum BfStatus bf_graph_from_store(const struct BfRecordStore *store, struct BfGraph **out);

// # Safety
// `graph` must come from this library; null is ignored.
void bf_graph_free(struct BfGraph *graph);

// # Safety
// `graph` must be a live handle and `id` NUL-terminated.
enum BfStatus bf_graph_add_node(struct BfGraph *graph, const char *id);

// Adds both endpoints and the edge; self-citations and repeats are
// ignored.
//
// # Safety
// `graph` must be a live handle; `citing` and `cited` NUL-terminated.
enum BfStatus bf_graph_add_edge(struct BfGraph *graph, const char *citing, const char *cited);

// `record\tcount` rows, most cited first.
//
// # Safety
// `graph` must be a live handle and `out` writable.
enum BfStatus bf_graph_counts_tsv(const struct BfGraph *graph, char **out);

// # Safety
// `graph` must be a live handle, `a` and `b` NUL-terminated and `out` writable.
enum BfStatus bf_graph_cocitation(const struct BfGraph *graph,
                                  const char *a,
                                  const char *b,
                                  size_t *out);

// `record\tscore` rows, highest first. Non-convergence is reported as
// `BF_STATUS_INTERNAL` and no report is written.
//
// # Safety
// `graph` must be a live handle and `out` writable.
enum BfStatus bf_graph_rank_tsv(const struct BfGraph *graph,
                                double damping,
                                double tolerance,
                                size_t max_iters,
                                char **out);

// Reads a usage log file. Malformed lines are skipped and counted.
//
// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum BfStatus bf_usage_load(const char *path, struct BfUsageLog **out);

// Parses usage log text held in memory.
//
// # Safety
// `text` must be a NUL-terminated string and `out` writable.
enum BfStatus bf_usage_parse(const char *text, struct BfUsageLog **out);

// # Safety
// `log` must come from this library; null is ignored.
void bf_usage_free(struct BfUsageLog *log);

// Number of malformed lines skipped while reading.
//
// # Safety
// `log` must be a live handle and `out` writable.
enum BfStatus bf_usage_skipped(const struct BfUsageLog *log, size_t *out);

// `record\tcount` rows for one action. The window `[from, to]` is
// inclusive and only applies when `windowed` is non-zero.
//
// # Safety
// `log` must be a live handle and `out` writable.
enum BfStatus bf_usage_top_k_tsv(const struct BfUsageLog *log,
                                 enum BfAction action,
                                 size_t k,
                                 int32_t windowed,
                                 int64_t from,
                                 int64_t to,
                                 char **out);

// Co-viewed records as `record\tstrength` rows; `BF_STATUS_NOT_FOUND`
// when the record never appears in the log.
//
// # Safety
// `log` must be a live handle, `record` NUL-terminated and `out` writable.
enum BfStatus bf_usage_recommend_tsv(const struct BfUsageLog *log,
                                     const char *record,
                                     size_t k,
                                     char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BIBLIOFORGE_H */

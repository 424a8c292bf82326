#include "tabattr/prompts.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tabattr/errors.hpp"

namespace tabattr {

namespace {

const char* kColumnRelevance = R"(You analyze which table columns are needed to derive an answer from a table.
Columns may be explicit (their values appear in the answer) or implicit
(required for intermediate computation, e.g. start and end time columns for a
duration question even though no column is labeled "duration").

Table:
{table}

Question: {question}
Answer: {answer}

Reply with JSON only:
{"explicit": [column indices], "implicit": [column indices]}
)";

const char* kEvidenceSpan = R"(You write a SQL-style WHERE condition that keeps exactly the table rows
needed to derive the answer.
Allowed operators: = != < <= > >= CONTAINS, combined with AND, OR, NOT and
parentheses. Reference columns by header name.
Example: WHERE Event_Name = 'Aerospace'

Table:
{table}

Relevant columns: {columns}
Question: {question}
Answer: {answer}

Reply with JSON only:
{"filter": "WHERE ..."}
)";

const char* kEvidenceRowsFallback = R"(List the 0-based data row indices required to derive the answer from the table.

Table:
{table}

Question: {question}
Answer: {answer}

Reply with JSON only:
{"rows": [row indices]}
)";

const char* kQueryDecomposition = R"(Decompose the question into minimal sub-questions, one per intermediate
reasoning step needed to reconstruct the answer. For each sub-question also
state the fact it establishes, as a short declarative sentence. If the
question is already atomic, return it unchanged as the only sub-question.

Table:
{table}

Question: {question}
Answer: {answer}

Reply with JSON only:
{"subquestions": [{"question": "...", "fact": "..."}]}
)";

const char* kSubqueryAttribution = R"(Ground each sub-question in the table cells that answer it. Use 0-based
(row, column) coordinates of the table shown below.

Table:
{table}

Question: {question}
Answer: {answer}
Sub-questions:
{subquestions}

Reply with JSON only:
{"attributions": [{"subquestion": <index>, "cells": [[row, col], ...]}]}
)";

const char* kSubqueryAttributionSingle = R"(Ground the sub-question in the table cells that answer it. Use 0-based
(row, column) coordinates of the table shown below.

Table:
{table}

Question: {question}
Answer: {answer}
Sub-question: {subquestions}

Reply with JSON only:
{"cells": [[row, col], ...]}
)";

const char* kFinalAttribution = R"(Align spans of the answer with their supporting table cells. Each phrase must
be a verbatim substring of the answer. Only use cells from the candidate
list; cells that support intermediate reasoning but no answer span are left
unaligned.

Answer: {answer}
Candidate cells (original coordinates, with contents):
{cells}

Reply with JSON only:
{"alignments": [{"phrase": "...", "cells": [[row, col], ...]}]}
)";

const char* kEntailment = R"(Premise: {premise}
Hypothesis: {hypothesis}

Does the premise entail the hypothesis? Reply with JSON only:
{"entailed": true or false, "score": number between 0 and 1}
)";

const char* kCellToFact = R"(Convert each attributed table cell into one short, self-contained declarative
fact. Combine the cell value with its column header and, when helpful, the
row key (first cell of the row).

Cells:
{cells}

Reply with JSON only, one fact per cell in order:
{"facts": ["...", ...]}
)";

const char* kAnswerToFact = R"(Decompose the answer into minimal, self-contained atomic facts. Resolve
pronouns; each fact must stand on its own.

Answer: {answer}

Reply with JSON only:
{"facts": ["...", ...]}
)";

const char* kFactSupport = R"(For each numbered pair, decide whether the first statement (table evidence)
supports the second statement (answer fact).

Pairs:
{pairs}

Reply with JSON only, one judgment per pair in order:
{"support": [true or false, ...]}
)";

}  // namespace

PromptLibrary PromptLibrary::builtin() {
    PromptLibrary lib;
    lib.templates_ = {
        {"column_relevance", kColumnRelevance},
        {"evidence_span", kEvidenceSpan},
        {"evidence_rows_fallback", kEvidenceRowsFallback},
        {"query_decomposition", kQueryDecomposition},
        {"subquery_attribution", kSubqueryAttribution},
        {"subquery_attribution_single", kSubqueryAttributionSingle},
        {"final_attribution", kFinalAttribution},
        {"entailment", kEntailment},
        {"cell_to_fact", kCellToFact},
        {"answer_to_fact", kAnswerToFact},
        {"fact_support", kFactSupport},
    };
    return lib;
}

PromptLibrary PromptLibrary::from_dir(const std::string& dir) {
    PromptLibrary lib = builtin();
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) {
        throw UsageError("prompt template directory not found: " + dir);
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        std::ifstream in(entry.path());
        std::ostringstream ss;
        ss << in.rdbuf();
        lib.templates_[entry.path().stem().string()] = ss.str();
    }
    return lib;
}

const std::string& PromptLibrary::raw(const std::string& name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) throw UsageError("unknown prompt template: " + name);
    return it->second;
}

std::string PromptLibrary::render(const std::string& name,
                                  const std::map<std::string, std::string>& vars) const {
    std::string out = raw(name);
    for (const auto& [key, value] : vars) {
        const std::string needle = "{" + key + "}";
        std::size_t pos = 0;
        while ((pos = out.find(needle, pos)) != std::string::npos) {
            out.replace(pos, needle.size(), value);
            pos += value.size();
        }
    }
    return out;
}

}  // namespace tabattr

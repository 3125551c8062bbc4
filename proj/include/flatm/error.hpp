#pragma once

#include <stdexcept>
#include <string>

namespace flatm {

// Reading or writing files failed, or an input file is malformed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical precondition or pipeline invariant was violated.
class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No token of the document is in the model vocabulary.
class OutOfVocabularyError : public PipelineError {
 public:
  explicit OutOfVocabularyError(const std::string& doc_id)
      : PipelineError("out-of-vocabulary document: " + doc_id) {}
};

}  // namespace flatm

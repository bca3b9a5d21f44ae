#pragma once

#include <stdexcept>
#include <string>

namespace normtab {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// table_model
class EmptyTableError : public Error {
 public:
  using Error::Error;
};
class UnknownColumnError : public Error {
 public:
  using Error::Error;
};
class RowCountMismatchError : public Error {
 public:
  using Error::Error;
};

// ingestion
class EmptyInputError : public Error {
 public:
  using Error::Error;
};
class NoHeaderError : public Error {
 public:
  using Error::Error;
};
class SchemaError : public Error {
 public:
  using Error::Error;
};
class RaggedRowsError : public Error {
 public:
  using Error::Error;
};

// llm_gateway
class ProviderError : public Error {
 public:
  using Error::Error;
};
class ReplayMissError : public Error {
 public:
  using Error::Error;
};
class ColumnShrunkError : public Error {
 public:
  using Error::Error;
};
class UnparseableError : public Error {
 public:
  using Error::Error;
};

// pipeline
class NormalizationFailedError : public Error {
 public:
  using Error::Error;
};

// sql_runtime
class EngineError : public Error {
 public:
  using Error::Error;
};
class SqlSyntaxError : public Error {
 public:
  using Error::Error;
};
class SqlSemanticError : public Error {
 public:
  using Error::Error;
};
class ForbiddenStatementError : public Error {
 public:
  using Error::Error;
};

// evaluator
class MismatchedRunsError : public Error {
 public:
  using Error::Error;
};

}  // namespace normtab

#pragma once

#include <stdexcept>
#include <string>

namespace ftsweep {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// data_ingest
class MissingColumnError : public Error { public: using Error::Error; };
class EmptyDatasetError : public Error { public: using Error::Error; };
class ZeroCountError : public Error { public: using Error::Error; };
class DecodeError : public Error { public: using Error::Error; };
class FetchFailedError : public Error { public: using Error::Error; };

// backbone_registry / freeze_engine
class UnknownArchitectureError : public Error { public: using Error::Error; };
class WeightsUnavailableError : public Error { public: using Error::Error; };
class UnsupportedModelError : public Error { public: using Error::Error; };
class DepthOutOfRangeError : public Error { public: using Error::Error; };
class PlanMismatchError : public Error { public: using Error::Error; };

// sweep_runner
class ShapeMismatchError : public Error { public: using Error::Error; };
class InvalidDistributionError : public Error { public: using Error::Error; };
class NonFiniteLossError : public Error { public: using Error::Error; };

// analysis
class EmptyConfusionError : public Error { public: using Error::Error; };
class TooFewPointsError : public Error { public: using Error::Error; };
class AllRungsFailedError : public Error { public: using Error::Error; };
class IoError : public Error { public: using Error::Error; };

// cli
class ConfigError : public Error { public: using Error::Error; };
class DatasetMissingError : public Error { public: using Error::Error; };
class StoreMissingError : public Error { public: using Error::Error; };

}  // namespace ftsweep

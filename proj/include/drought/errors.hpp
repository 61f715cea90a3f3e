#pragma once

#include <stdexcept>
#include <string>

namespace drought {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// sim-kernel
class SchedulingInPast : public Error { public: using Error::Error; };
class UnknownEntity : public Error { public: using Error::Error; };

// coverage
class NonPositiveRange : public Error { public: using Error::Error; };
class UntileableShape : public Error { public: using Error::Error; };
class InsufficientNodes : public Error { public: using Error::Error; };
class PlacementInfeasible : public Error { public: using Error::Error; };

// environment
class UnknownRegion : public Error { public: using Error::Error; };

// node stack
class UnknownInterest : public Error { public: using Error::Error; };
class OrphanNode : public Error { public: using Error::Error; };
class DeliveryAbandoned : public Error { public: using Error::Error; };
class DecodeError : public Error { public: using Error::Error; };

// analytics
class NoData : public Error { public: using Error::Error; };
class InvalidThresholds : public Error { public: using Error::Error; };
class InsufficientSpan : public Error { public: using Error::Error; };
class InvalidWindow : public Error { public: using Error::Error; };

// harness
class ParseError : public Error { public: using Error::Error; };
class ValidationError : public Error { public: using Error::Error; };
class IoError : public Error { public: using Error::Error; };
class ReplayMismatch : public Error { public: using Error::Error; };

}  // namespace drought

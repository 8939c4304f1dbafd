#include "geocount/error.hpp"

namespace geocount {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Ok: return "Ok";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnknownCovariate: return "UnknownCovariate";
    case ErrorCode::DuplicateCovariate: return "DuplicateCovariate";
    case ErrorCode::ConstantColumn: return "ConstantColumn";
    case ErrorCode::EmptySelection: return "EmptySelection";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::NegativeCount: return "NegativeCount";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::InvalidCoordinate: return "InvalidCoordinate";
    case ErrorCode::NameCollision: return "NameCollision";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::NonFiniteObjective: return "NonFiniteObjective";
    case ErrorCode::RankDeficientDesign: return "RankDeficientDesign";
    case ErrorCode::SeparationSuspected: return "SeparationSuspected";
    case ErrorCode::SingularInformation: return "SingularInformation";
    case ErrorCode::ZeroStandardError: return "ZeroStandardError";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace geocount

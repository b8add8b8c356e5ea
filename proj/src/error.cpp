#include "arlif/error.hpp"

namespace arlif {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::FieldCountMismatch: return "FieldCountMismatch";
        case ErrorKind::NumericParse: return "NumericParse";
        case ErrorKind::SingleClass: return "SingleClass";
        case ErrorKind::InsufficientData: return "InsufficientData";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::StaleCache: return "StaleCache";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::EmptyStream: return "EmptyStream";
        case ErrorKind::BadMagic: return "BadMagic";
        case ErrorKind::VersionUnsupported: return "VersionUnsupported";
        case ErrorKind::TruncatedFile: return "TruncatedFile";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::Empty: return "Empty";
        case ErrorKind::Io: return "Io";
        case ErrorKind::CorruptModel: return "CorruptModel";
    }
    return "Unknown";
}

}  // namespace arlif

// Copyright (c) 2026 plcpivot contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <json.hpp>

#include "wire.hpp"

namespace plcpivot::jsonio {

using json = nlohmann::ordered_json;

json describe_message(const wire::ProtocolMessage& msg);
json describe_pointer(const wire::AnyPointer& p);
json describe_pointer_decode(const wire::PointerDecode& d);

/// Classification of an arbitrary byte string as protocol frames; never
/// throws. Used by `codec decode` and the C API.
json describe_frame_bytes(std::span<const std::uint8_t> bytes);

}  // namespace plcpivot::jsonio

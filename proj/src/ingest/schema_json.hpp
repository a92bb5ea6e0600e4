//
// Copyright 2026 The fairci Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef FAIRCI_SRC_INGEST_SCHEMA_JSON_HPP_
#define FAIRCI_SRC_INGEST_SCHEMA_JSON_HPP_

#include "fairci/ingest.hpp"
#include "json.hpp"

namespace fairci {

// Schema from an already parsed JSON value. Error kSchemaError.
SchemaConfig SchemaFromJsonValue(const nlohmann::json& j);

}  // namespace fairci

#endif  // FAIRCI_SRC_INGEST_SCHEMA_JSON_HPP_

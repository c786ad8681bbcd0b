// Copyright 2026 the infoknn project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "infoknn/common.hpp"
#include "infoknn/config.hpp"
#include "infoknn/corpus.hpp"
#include "infoknn/corrector.hpp"
#include "infoknn/datastore.hpp"
#include "infoknn/encoder.hpp"
#include "infoknn/eval.hpp"
#include "infoknn/io.hpp"
#include "infoknn/retrieval.hpp"
#include "infoknn/synthetic.hpp"
#include "infoknn/vocab.hpp"

// Copyright 2026 The cbmnl Authors.
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

/* Builds against the public header as plain C. */
#include <stdio.h>
#include <string.h>

#include "cbmnl/cbmnl.h"

int main(void) {
  const double contexts[2] = {1.0, -1.0};
  const double theta[1] = {1.0};
  double probs[2];
  double none = 0.0;
  cbmnl_status s = cbmnl_choice_probabilities(contexts, 2, 1, theta, probs, &none);
  if (s != CBMNL_OK) {
    fprintf(stderr, "%s: %s\n", cbmnl_status_string(s), cbmnl_last_error());
    return 1;
  }
  if (probs[0] < 0.6652 || probs[0] > 0.6653) return 2;
  if (cbmnl_choice_probabilities(NULL, 2, 1, theta, probs, &none) != CBMNL_ERR_INVALID_ARGUMENT) return 3;
  if (strlen(cbmnl_last_error()) == 0) return 4;
  printf("cbmnl %s ok\n", cbmnl_version());
  return 0;
}

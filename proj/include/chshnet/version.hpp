#pragma once

#define CHSHNET_VERSION "0.1.0"

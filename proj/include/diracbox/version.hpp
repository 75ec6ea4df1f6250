#pragma once

#define DIRACBOX_VERSION "0.1.0"

#pragma once

// Single include point for cpp-httplib so every translation unit agrees on
// its configuration (mixing SSL and non-SSL builds of the header is an ODR
// violation).
#ifdef ARQA_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

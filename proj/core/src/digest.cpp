#include "mlcert/digest.hpp"

#include <openssl/evp.h>

#include <array>
#include <cctype>
#include <memory>

#include "mlcert/error.hpp"

namespace mlcert {

std::string sha256_hex(std::span<const unsigned char> payload) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> hash{};
    unsigned int length = 0;
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                                EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), payload.data(), payload.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), hash.data(), &length) != 1) {
        throw StorageError("SHA-256 digest computation failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * length);
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(hex[hash[i] >> 4]);
        out.push_back(hex[hash[i] & 0x0f]);
    }
    return out;
}

std::string sha256_hex(std::string_view payload) {
    return sha256_hex(std::span<const unsigned char>(
        reinterpret_cast<const unsigned char*>(payload.data()), payload.size()));
}

bool is_valid_digest(std::string_view digest) {
    if (digest.size() != 64) {
        return false;
    }
    for (char c : digest) {
        if (!std::isxdigit(static_cast<unsigned char>(c)) ||
            std::isupper(static_cast<unsigned char>(c))) {
            return false;
        }
    }
    return true;
}

} // namespace mlcert

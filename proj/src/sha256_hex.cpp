#include "bip/sha256_hex.hpp"

#include "bip/errors.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <vector>

namespace bip {

std::string sha256_hex(const void* data, std::size_t len) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int digest_len = 0;
    if (EVP_Digest(data, len, digest.data(), &digest_len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256: digest failed");
    }
    std::string hex(digest_len * 2, '0');
    static const char* k = "0123456789abcdef";
    for (unsigned int i = 0; i < digest_len; ++i) {
        hex[2 * i] = k[digest[i] >> 4];
        hex[2 * i + 1] = k[digest[i] & 0xF];
    }
    return hex;
}

std::string sha256_file_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("sha256: cannot open " + path);
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    std::vector<char> buf(1 << 20);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        const auto got = in.gcount();
        if (got > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(got));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int digest_len = 0;
    EVP_DigestFinal_ex(ctx, digest.data(), &digest_len);
    EVP_MD_CTX_free(ctx);
    std::string hex(digest_len * 2, '0');
    static const char* k = "0123456789abcdef";
    for (unsigned int i = 0; i < digest_len; ++i) {
        hex[2 * i] = k[digest[i] >> 4];
        hex[2 * i + 1] = k[digest[i] & 0xF];
    }
    return hex;
}

}  // namespace bip

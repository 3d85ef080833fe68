#include <float.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

__extension__ typedef __int128 damat_i128;
__extension__ typedef unsigned __int128 damat_u128;

#define DAMAT_I128(hi, lo) ((damat_i128)(((damat_u128)(hi) << 64) | (damat_u128)(lo)))
#define DAMAT_I128_MAX ((damat_i128)((((damat_u128)1) << 127) - 1))
#define DAMAT_I128_MIN (-DAMAT_I128_MAX - 1)
#define DAMAT_AMPLIFY_LIMIT (((damat_i128)1) << 100)
#define DAMAT_GOLDEN 0x9E3779B97F4A7C15ULL
#define DAMAT_INV_REAL_ATTEMPTS 64

#define DAMAT_EXIT_LOG_FAILURE 86
#define DAMAT_EXIT_PROBE_FAILURE 87

enum { DAMAT_INTEGER, DAMAT_REAL, DAMAT_BITFLIP, DAMAT_HOLD };
enum {
    DAMAT_OP_VAT,
    DAMAT_OP_VBT,
    DAMAT_OP_VOR,
    DAMAT_OP_BF,
    DAMAT_OP_INV,
    DAMAT_OP_IV,
    DAMAT_OP_ASA,
    DAMAT_OP_SS,
    DAMAT_OP_HV,
    DAMAT_OP_FVAT,
    DAMAT_OP_FVBT,
    DAMAT_OP_FVOR
};
enum {
    DAMAT_ENC_SIGNED,
    DAMAT_ENC_UNSIGNED,
    DAMAT_ENC_IEEE32,
    DAMAT_ENC_IEEE64,
    DAMAT_ENC_FIXED,
    DAMAT_ENC_BITS
};

typedef struct {
    const char *name;
    size_t buffer_len;
    int big_endian;
} damat_model;

/*
 * One mutation operation with parameters already in item units.
 * Integer procedures read p[], real procedures read the double bit
 * patterns in r[]. BF keeps min/max/count in p[0..2] and the required bit
 * state in state (-1 = any). HV keeps its repetition count in p[0].
 */
typedef struct {
    unsigned long model;
    unsigned long row;
    unsigned long procedure;
    int kind;
    int op;
    int encoding;
    size_t offset;
    size_t width;
    damat_i128 p[3];
    unsigned long long r[3];
    int factor_real;
    damat_i128 factor_k;
    unsigned long long factor_x;
    int state;
} damat_op;

/* @TABLES@ */

typedef struct {
    unsigned long long state;
} damat_rng;

static unsigned long long damat_mix(unsigned long long z)
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

static unsigned long long damat_next(damat_rng *rng)
{
    rng->state += DAMAT_GOLDEN;
    return damat_mix(rng->state);
}

/* Uniform in [0, bound) for 0 < bound <= 2^64. */
static damat_u128 damat_below(damat_rng *rng, damat_u128 bound)
{
    unsigned long long b, threshold, x;
    if (bound == ((damat_u128)1) << 64) {
        return damat_next(rng);
    }
    b = (unsigned long long)bound;
    threshold = (0ULL - b) % b;
    for (;;) {
        x = damat_next(rng);
        if (x >= threshold) {
            return x % b;
        }
    }
}

static double damat_unit(damat_rng *rng)
{
    return (double)(damat_next(rng) >> 11) * (1.0 / 9007199254740992.0);
}

static double damat_f64(unsigned long long bits)
{
    double x;
    memcpy(&x, &bits, sizeof x);
    return x;
}

static unsigned long long damat_f64_bits(double x)
{
    unsigned long long bits;
    memcpy(&bits, &x, sizeof bits);
    return bits;
}

static unsigned long long damat_f32_bits(float x)
{
    unsigned int bits;
    memcpy(&bits, &x, sizeof bits);
    return bits;
}

static float damat_f32(unsigned long long bits)
{
    unsigned int narrow = (unsigned int)bits;
    float x;
    memcpy(&x, &narrow, sizeof x);
    return x;
}

static int damat_is_nan(double x)
{
    return x != x;
}

static int damat_is_inf(double x)
{
    return !damat_is_nan(x) && damat_is_nan(x - x);
}

/* Half away from zero, without libm. */
static double damat_round(double x)
{
    double t;
    if (damat_is_nan(x) || x >= 4503599627370496.0 || x <= -4503599627370496.0) {
        return x;
    }
    t = (double)(long long)x;
    if (x - t >= 0.5) {
        t += 1.0;
    } else if (t - x >= 0.5) {
        t -= 1.0;
    }
    return t;
}

static damat_i128 damat_add(damat_i128 a, damat_i128 b)
{
    if (b > 0 && a > DAMAT_I128_MAX - b) {
        return DAMAT_I128_MAX;
    }
    if (b < 0 && a < DAMAT_I128_MIN - b) {
        return DAMAT_I128_MIN;
    }
    return a + b;
}

static damat_i128 damat_sub(damat_i128 a, damat_i128 b)
{
    if (b < 0 && a > DAMAT_I128_MAX + b) {
        return DAMAT_I128_MAX;
    }
    if (b > 0 && a < DAMAT_I128_MIN + b) {
        return DAMAT_I128_MIN;
    }
    return a - b;
}

/* diff * factor for a non-negative diff, saturating at 2^100. */
static damat_i128 damat_amplify(const damat_op *op, damat_i128 diff)
{
    if (op->factor_real) {
        double limit = 1267650600228229401496703205376.0;
        double y = damat_round((double)diff * damat_f64(op->factor_x));
        if (damat_is_nan(y)) {
            return 0;
        }
        if (y < -limit) {
            y = -limit;
        } else if (y > limit) {
            y = limit;
        }
        return (damat_i128)y;
    } else {
        damat_i128 k = op->factor_k;
        damat_i128 magnitude = k < 0 ? -k : k;
        if (diff == 0 || k == 0) {
            return 0;
        }
        if (diff > DAMAT_AMPLIFY_LIMIT / magnitude) {
            return k < 0 ? -DAMAT_AMPLIFY_LIMIT : DAMAT_AMPLIFY_LIMIT;
        }
        return diff * k;
    }
}

static unsigned long long damat_read_unsigned(const unsigned char *bytes, size_t width, int big)
{
    unsigned long long acc = 0;
    size_t i;
    for (i = 0; i < width; i++) {
        acc = (acc << 8) | bytes[big ? i : width - 1 - i];
    }
    return acc;
}

static void damat_write_unsigned(unsigned char *bytes, size_t width, unsigned long long value, int big)
{
    size_t i;
    for (i = 0; i < width; i++) {
        unsigned char byte = (unsigned char)(value >> (8 * i));
        bytes[big ? width - 1 - i : i] = byte;
    }
}

static void damat_bounds(const damat_op *op, damat_i128 *lo, damat_i128 *hi)
{
    unsigned bits = (unsigned)(op->width * 8);
    if (op->encoding == DAMAT_ENC_UNSIGNED) {
        *lo = 0;
        *hi = (((damat_i128)1) << bits) - 1;
    } else {
        *lo = -(((damat_i128)1) << (bits - 1));
        *hi = (((damat_i128)1) << (bits - 1)) - 1;
    }
}

static damat_i128 damat_read_integer(const damat_op *op, const unsigned char *bytes, int big)
{
    unsigned long long raw = damat_read_unsigned(bytes, op->width, big);
    unsigned bits = (unsigned)(op->width * 8);
    if (op->encoding == DAMAT_ENC_UNSIGNED) {
        return (damat_i128)raw;
    }
    if (bits == 64) {
        return raw >= 0x8000000000000000ULL ? (damat_i128)raw - (((damat_i128)1) << 64) : (damat_i128)raw;
    }
    if (raw & (1ULL << (bits - 1))) {
        return (damat_i128)raw - (((damat_i128)1) << bits);
    }
    return (damat_i128)raw;
}

static damat_i128 damat_inv_integer(damat_i128 v, damat_i128 lo, damat_i128 hi, damat_rng *rng, int *guard)
{
    damat_u128 n;
    damat_i128 r;
    if (lo > hi) {
        return v;
    }
    n = (damat_u128)(hi - lo + 1);
    if (lo <= v && v <= hi) {
        if (n == 1) {
            return v;
        }
        r = lo + (damat_i128)damat_below(rng, n - 1);
        *guard = 1;
        return r >= v ? r + 1 : r;
    }
    *guard = 1;
    return lo + (damat_i128)damat_below(rng, n);
}

static damat_i128 damat_eval_integer(const damat_op *op, damat_i128 v, damat_rng *rng, int *guard)
{
    const damat_i128 *p = op->p;
    *guard = 0;
    switch (op->op) {
    case DAMAT_OP_VAT:
        if (v <= p[0]) {
            *guard = 1;
            return damat_add(p[0], p[1]);
        }
        return v;
    case DAMAT_OP_VBT:
        if (v >= p[0]) {
            *guard = 1;
            return damat_sub(p[0], p[1]);
        }
        return v;
    case DAMAT_OP_VOR:
        if (p[0] <= v && v <= p[1]) {
            *guard = 1;
            return op->procedure == 0 ? damat_sub(p[0], p[2]) : damat_add(p[1], p[2]);
        }
        return v;
    case DAMAT_OP_INV:
        return damat_inv_integer(v, p[0], p[1], rng, guard);
    case DAMAT_OP_IV:
        if (v != p[0]) {
            *guard = 1;
            return p[0];
        }
        return v;
    case DAMAT_OP_ASA:
        *guard = 1;
        if (v >= p[0]) {
            return damat_add(damat_add(p[0], damat_amplify(op, damat_sub(v, p[0]))), p[1]);
        }
        return damat_sub(damat_sub(p[0], damat_amplify(op, damat_sub(p[0], v))), p[1]);
    case DAMAT_OP_SS:
        *guard = 1;
        return damat_add(v, p[0]);
    case DAMAT_OP_FVAT:
        if (v > p[0]) {
            *guard = 1;
            return damat_sub(p[0], p[1]);
        }
        return v;
    case DAMAT_OP_FVBT:
        if (v < p[0]) {
            *guard = 1;
            return damat_add(p[0], p[1]);
        }
        return v;
    case DAMAT_OP_FVOR:
        if ((p[0] <= v && v <= p[1]) || p[0] > p[1]) {
            return v;
        }
        *guard = 1;
        return p[0] + (damat_i128)damat_below(rng, (damat_u128)(p[1] - p[0] + 1));
    default:
        return v;
    }
}

static double damat_stored(double x, int single)
{
    return single ? (double)(float)x : x;
}

static double damat_draw_real(double min, double max, damat_rng *rng)
{
    double x;
    if (min == max) {
        return min;
    }
    x = min + damat_unit(rng) * (max - min);
    if (x < min) {
        return min;
    }
    if (x > max) {
        return max;
    }
    return x;
}

static double damat_inv_real(double v, double min, double max, int single, damat_rng *rng, int *guard)
{
    double current, r;
    int attempt;
    if (min > max) {
        return v;
    }
    current = damat_stored(v, single);
    if (min == max) {
        if (damat_stored(min, single) != current) {
            *guard = 1;
            return min;
        }
        return v;
    }
    for (attempt = 0; attempt < DAMAT_INV_REAL_ATTEMPTS; attempt++) {
        r = damat_draw_real(min, max, rng);
        if (damat_stored(r, single) != current) {
            *guard = 1;
            return r;
        }
    }
    return v;
}

static double damat_eval_real(const damat_op *op, double v, int single, damat_rng *rng, int *guard)
{
    double a = damat_f64(op->r[0]);
    double b = damat_f64(op->r[1]);
    double c = damat_f64(op->r[2]);
    double f = damat_f64(op->factor_x);
    *guard = 0;
    switch (op->op) {
    case DAMAT_OP_VAT:
        if (v <= a) {
            *guard = 1;
            return a + b;
        }
        return v;
    case DAMAT_OP_VBT:
        if (v >= a) {
            *guard = 1;
            return a - b;
        }
        return v;
    case DAMAT_OP_VOR:
        if (a <= v && v <= b) {
            *guard = 1;
            return op->procedure == 0 ? a - c : b + c;
        }
        return v;
    case DAMAT_OP_INV:
        return damat_inv_real(v, a, b, single, rng, guard);
    case DAMAT_OP_IV:
        if (v != a) {
            *guard = 1;
            return a;
        }
        return v;
    case DAMAT_OP_ASA:
        *guard = 1;
        if (v >= a) {
            return a + (v - a) * f + b;
        }
        return a - (a - v) * f - b;
    case DAMAT_OP_SS:
        *guard = 1;
        return v + a;
    case DAMAT_OP_FVAT:
        if (v > a) {
            *guard = 1;
            return a - b;
        }
        return v;
    case DAMAT_OP_FVBT:
        if (v < a) {
            *guard = 1;
            return a + b;
        }
        return v;
    case DAMAT_OP_FVOR:
        if (v < a || v > b) {
            *guard = 1;
            return damat_draw_real(a, b, rng);
        }
        return v;
    default:
        return v;
    }
}

static double damat_clamp_real(double x, double original, int single, int *clamped)
{
    double limit = single ? (double)FLT_MAX : DBL_MAX;
    double magnitude = x < 0 ? -x : x;
    *clamped = 0;
    if (damat_is_nan(x) || magnitude <= limit || (damat_is_inf(x) && damat_is_inf(original))) {
        return x;
    }
    *clamped = 1;
    return x < 0 ? -limit : limit;
}

static size_t damat_bit_byte(size_t width, size_t index, int big)
{
    return big ? width - 1 - index / 8 : index / 8;
}

static int damat_bit_get(const unsigned char *bits, size_t width, size_t index, int big)
{
    return (bits[damat_bit_byte(width, index, big)] >> (index % 8)) & 1;
}

static int damat_bit_flip_op(const damat_op *op, unsigned char *bits, int big, damat_rng *rng)
{
    size_t eligible[DAMAT_MAX_ITEM_BYTES * 8];
    size_t len = 0, i, j, tmp;
    size_t width_bits = op->width * 8;
    size_t min = (size_t)op->p[0];
    size_t max = (size_t)op->p[1];
    size_t count = (size_t)op->p[2];
    if (max > width_bits - 1) {
        max = width_bits - 1;
    }
    for (i = min; i <= max; i++) {
        if (op->state < 0 || damat_bit_get(bits, op->width, i, big) == op->state) {
            eligible[len++] = i;
        }
    }
    if (count == 0 || len < count) {
        return 0;
    }
    for (i = 0; i < count; i++) {
        j = i + (size_t)damat_below(rng, (damat_u128)(len - i));
        tmp = eligible[i];
        eligible[i] = eligible[j];
        eligible[j] = tmp;
    }
    for (i = 0; i < count; i++) {
        size_t index = eligible[i];
        bits[damat_bit_byte(op->width, index, big)] ^= (unsigned char)(1u << (index % 8));
    }
    return 1;
}

static struct {
    int initialized;
    int inert;
    unsigned long mutant;
    const damat_op *op;
    damat_rng rng;
    FILE *log;
    unsigned long long sequence;
    unsigned long long application_counter;
    unsigned char held[DAMAT_MAX_ITEM_BYTES];
    int has_held;
    unsigned long long hold_counter;
} damat_ctx;

static void damat_fail(int code, const char *what, const char *detail)
{
    fprintf(stderr, "damut probe: %s%s\n", what, detail ? detail : "");
    exit(code);
}

/* Decimal or 0x-prefixed hexadecimal, surrounding whitespace allowed. */
static int damat_parse_u64(const char *text, unsigned long long *out)
{
    const char *s = text, *end;
    unsigned long long value = 0, base = 10, digit;
    int digits = 0;
    while (*s == ' ' || *s == '\t' || *s == '\n' || *s == '\r') {
        s++;
    }
    end = s + strlen(s);
    while (end > s && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\n' || end[-1] == '\r')) {
        end--;
    }
    if (end - s > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
        base = 16;
        s += 2;
    }
    if (s < end && *s == '+') {
        s++;
    }
    for (; s < end; s++, digits++) {
        if (*s >= '0' && *s <= '9') {
            digit = (unsigned long long)(*s - '0');
        } else if (base == 16 && *s >= 'a' && *s <= 'f') {
            digit = (unsigned long long)(*s - 'a' + 10);
        } else if (base == 16 && *s >= 'A' && *s <= 'F') {
            digit = (unsigned long long)(*s - 'A' + 10);
        } else {
            return 0;
        }
        if (digit >= base || value > (~0ULL - digit) / base) {
            return 0;
        }
        value = value * base + digit;
    }
    if (digits == 0) {
        return 0;
    }
    *out = value;
    return 1;
}

#ifdef DAMAT_RUNTIME_LOAD
#define DAMAT_TABLE_FIELDS 23
static void damat_load_table(void)
{
    const char *path = getenv("DAMAT_TABLE");
    FILE *file;
    unsigned long version = 0, count = 0, id;
    unsigned long long f[DAMAT_TABLE_FIELDS];
    int i;
    if (path == NULL) {
        path = "faultmodel.tbl";
    }
    file = fopen(path, "r");
    if (file == NULL) {
        damat_fail(DAMAT_EXIT_PROBE_FAILURE, "cannot open operation table ", path);
    }
    if (fscanf(file, "damat-table %lu %lu", &version, &count) != 2 || version != 1
        || count != DAMAT_MUTANT_COUNT) {
        damat_fail(DAMAT_EXIT_PROBE_FAILURE, "operation table does not match this API: ", path);
    }
    for (id = 1; id <= count; id++) {
        damat_op *op = &damat_ops[id];
        for (i = 0; i < DAMAT_TABLE_FIELDS; i++) {
            if (fscanf(file, "%llx", &f[i]) != 1) {
                damat_fail(DAMAT_EXIT_PROBE_FAILURE, "truncated operation table ", path);
            }
        }
        if (f[0] != id || f[1] >= DAMAT_MODEL_COUNT || f[8] == 0 || f[8] > DAMAT_MAX_ITEM_BYTES) {
            damat_fail(DAMAT_EXIT_PROBE_FAILURE, "malformed operation table ", path);
        }
        op->model = (unsigned long)f[1];
        op->row = (unsigned long)f[2];
        op->procedure = (unsigned long)f[3];
        op->kind = (int)f[4];
        op->op = (int)f[5];
        op->encoding = (int)f[6];
        op->offset = (size_t)f[7];
        op->width = (size_t)f[8];
        op->p[0] = DAMAT_I128(f[9], f[10]);
        op->p[1] = DAMAT_I128(f[11], f[12]);
        op->p[2] = DAMAT_I128(f[13], f[14]);
        op->r[0] = f[15];
        op->r[1] = f[16];
        op->r[2] = f[17];
        op->factor_real = (int)f[18];
        op->factor_k = DAMAT_I128(f[19], f[20]);
        op->factor_x = f[21];
        op->state = (int)f[22] - 1;
    }
    fclose(file);
}
#endif

static void damat_init(void)
{
    unsigned long long mutant, seed = DAMAT_GLOBAL_SEED;
    const char *raw;
    damat_ctx.initialized = 1;
#ifdef DAMAT_MUTANT_ID
    mutant = (unsigned long long)(DAMAT_MUTANT_ID);
#else
    raw = getenv("DAMAT_MUTANT_ID");
    if (raw == NULL) {
        damat_ctx.inert = 1;
        return;
    }
    if (!damat_parse_u64(raw, &mutant) || mutant > 0xFFFFFFFFULL) {
        damat_fail(DAMAT_EXIT_PROBE_FAILURE, "invalid DAMAT_MUTANT_ID=", raw);
    }
#endif
#ifdef DAMAT_RUNTIME_LOAD
    damat_load_table();
#endif
    raw = getenv("DAMAT_SEED");
    if (raw != NULL && !damat_parse_u64(raw, &seed)) {
        damat_fail(DAMAT_EXIT_PROBE_FAILURE, "invalid DAMAT_SEED=", raw);
    }
    raw = getenv("DAMAT_LOG");
    if (raw != NULL) {
        damat_ctx.log = fopen(raw, "a");
        if (damat_ctx.log == NULL) {
            damat_fail(DAMAT_EXIT_LOG_FAILURE, "cannot open application log ", raw);
        }
        setvbuf(damat_ctx.log, NULL, _IOFBF, 1 << 16);
    }
    if (mutant > DAMAT_MUTANT_COUNT) {
        damat_fail(DAMAT_EXIT_PROBE_FAILURE, "unknown mutant id", NULL);
    }
    damat_ctx.mutant = (unsigned long)mutant;
    damat_ctx.op = mutant == 0 ? NULL : &damat_ops[mutant];
    damat_ctx.rng.state = damat_mix(seed + DAMAT_GOLDEN * (mutant + 1));
}

static void damat_put_json_string(FILE *out, const char *s)
{
    static const char digits[] = "0123456789abcdef";
    fputc('"', out);
    for (; *s; s++) {
        unsigned char ch = (unsigned char)*s;
        switch (ch) {
        case '"':
            fputs("\\\"", out);
            break;
        case '\\':
            fputs("\\\\", out);
            break;
        case '\b':
            fputs("\\b", out);
            break;
        case '\f':
            fputs("\\f", out);
            break;
        case '\n':
            fputs("\\n", out);
            break;
        case '\r':
            fputs("\\r", out);
            break;
        case '\t':
            fputs("\\t", out);
            break;
        default:
            if (ch < 0x20) {
                fputs("\\u00", out);
                fputc(digits[ch >> 4], out);
                fputc(digits[ch & 15], out);
            } else {
                fputc(ch, out);
            }
        }
    }
    fputc('"', out);
}

static void damat_put_hex(FILE *out, const unsigned char *bytes, size_t len)
{
    static const char digits[] = "0123456789abcdef";
    size_t i;
    fputc('"', out);
    for (i = 0; i < len; i++) {
        fputc(digits[bytes[i] >> 4], out);
        fputc(digits[bytes[i] & 15], out);
    }
    fputc('"', out);
}

static void damat_log(const char *test_id, const damat_model *model, const unsigned char *before,
                      const unsigned char *after, size_t width, int applied, int clamped)
{
    FILE *out = damat_ctx.log;
    unsigned long long sequence = damat_ctx.sequence++;
    if (out == NULL) {
        return;
    }
    fprintf(out, "{\"sequence_no\":%llu,\"kind\":\"%s\",\"test_id\":", sequence,
            damat_ctx.op ? "mutation" : "coverage");
    damat_put_json_string(out, test_id);
    fputs(",\"fault_model\":", out);
    damat_put_json_string(out, model->name);
    fprintf(out, ",\"mutant_id\":%lu,", damat_ctx.mutant);
    if (damat_ctx.op) {
        fprintf(out, "\"row_index\":%lu,\"procedure_index\":%lu,", damat_ctx.op->row,
                damat_ctx.op->procedure);
    } else {
        fputs("\"row_index\":null,\"procedure_index\":null,", out);
    }
    fprintf(out, "\"applied\":%s,\"clamped\":%s,\"original_bytes\":", applied ? "true" : "false",
            clamped ? "true" : "false");
    damat_put_hex(out, before, width);
    fputs(",\"mutated_bytes\":", out);
    damat_put_hex(out, after, width);
    fputs("}\n", out);
    if (fflush(out) != 0 || ferror(out)) {
        damat_fail(DAMAT_EXIT_LOG_FAILURE, "cannot write application log", NULL);
    }
}

/* Applies the active operation to one item; returns 1 when its guard held. */
static int damat_apply(const damat_op *op, int big, unsigned char *item, int *clamped)
{
    int guard = 0;
    *clamped = 0;
    switch (op->kind) {
    case DAMAT_INTEGER: {
        damat_i128 lo, hi, v, out;
        damat_bounds(op, &lo, &hi);
        v = damat_read_integer(op, item, big);
        out = damat_eval_integer(op, v, &damat_ctx.rng, &guard);
        if (!guard) {
            return 0;
        }
        if (out < lo) {
            out = lo;
            *clamped = 1;
        } else if (out > hi) {
            out = hi;
            *clamped = 1;
        }
        damat_write_unsigned(item, op->width, (unsigned long long)out, big);
        return 1;
    }
    case DAMAT_REAL: {
        int single = op->encoding == DAMAT_ENC_IEEE32;
        unsigned long long raw = damat_read_unsigned(item, op->width, big);
        double v = single ? (double)damat_f32(raw) : damat_f64(raw);
        double out = damat_eval_real(op, v, single, &damat_ctx.rng, &guard);
        if (!guard) {
            return 0;
        }
        out = damat_clamp_real(out, v, single, clamped);
        raw = single ? damat_f32_bits((float)out) : damat_f64_bits(out);
        damat_write_unsigned(item, op->width, raw, big);
        return 1;
    }
    case DAMAT_BITFLIP:
        return damat_bit_flip_op(op, item, big, &damat_ctx.rng);
    case DAMAT_HOLD: {
        unsigned long long times = (unsigned long long)op->p[0];
        if (damat_ctx.has_held && damat_ctx.hold_counter < times) {
            damat_ctx.hold_counter++;
            memcpy(item, damat_ctx.held, op->width);
            return 1;
        }
        memcpy(damat_ctx.held, item, op->width);
        damat_ctx.has_held = 1;
        damat_ctx.hold_counter = 1;
        return 0;
    }
    default:
        return 0;
    }
}

static int damat_mutate(unsigned long model_index, unsigned char *buffer, size_t length, const char *test_id)
{
    const damat_model *model = &damat_models[model_index];
    const damat_op *op;
    unsigned char before[DAMAT_MAX_ITEM_BYTES];
    int clamped, applied;
    if (!damat_ctx.initialized) {
        damat_init();
    }
    if (damat_ctx.inert) {
        return 0;
    }
    if (test_id == NULL) {
        test_id = getenv("DAMAT_TEST_ID");
        if (test_id == NULL) {
            test_id = "";
        }
    }
    if (length != model->buffer_len) {
        damat_fail(DAMAT_EXIT_PROBE_FAILURE, "buffer length does not match fault model ", model->name);
    }
    op = damat_ctx.op;
    if (op == NULL) {
        damat_log(test_id, model, buffer, buffer, 0, 0, 0);
        return 0;
    }
    if (op->model != model_index) {
        return 0;
    }
    memcpy(before, buffer + op->offset, op->width);
    if (damat_apply(op, model->big_endian, buffer + op->offset, &clamped)) {
        damat_ctx.application_counter++;
    }
    applied = memcmp(before, buffer + op->offset, op->width) != 0;
    damat_log(test_id, model, before, buffer + op->offset, op->width, applied, clamped);
    return applied;
}

unsigned long long damat_application_counter(void)
{
    return damat_ctx.application_counter;
}

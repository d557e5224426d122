#include <stdlib.h>
#include <string.h>

struct buf {
    char *data;
    size_t len;
    size_t cap;
};

static int grow(struct buf *b, size_t need)
{
    if (b->cap >= need)
        return 0;
    char *p = realloc(b->data, need);
    if (!p)
        return -1;
    b->data = p;
    b->cap = need;
    return 0;
}

int buf_append(struct buf *b, const char *src, size_t n)
{
    if (n > SIZE_MAX - b->len || grow(b, b->len + n) != 0)
        return -1;
    memcpy(b->data + b->len, src, n);
    b->len += n;
    return 0;
}

int buf_copy_header(struct buf *b, const char *src)
{
    size_t n = (unsigned char)src[0];
    if (grow(b, n) != 0)
        return -1;
    memcpy(b->data, src + 1, n);
    b->len = n;
    return 0;
}

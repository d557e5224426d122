#include <stdio.h>

#define MAX_FIELDS 8

static int count_fields(const char *line)
{
    int n = 1;
    for (const char *p = line; *p; p++)
        if (*p == ',')
            n++;
    return n;
}

int parse_line(const char *line, const char **fields)
{
    int n = 0;
    const char *start = line;
    for (const char *p = line; ; p++) {
        if (*p == ',' || *p == '\0') {
            fields[n++] = start;
            start = p + 1;
        }
        if (*p == '\0')
            break;
    }
    return n;
}

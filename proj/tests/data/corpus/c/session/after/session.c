#include <stdlib.h>

struct session {
    int id;
    char *token;
};

void session_free(struct session *s)
{
    free(s->token);
    free(s);
}

int session_close(struct session *s)
{
    int id = s->id;
    session_free(s);
    return id;
}

static const char *kind = "session";

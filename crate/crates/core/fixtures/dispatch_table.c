/* Bytecode interpreter dispatch loop, two ways. */
#include "vm.h"

int run(const unsigned char *code, long *stack)
{
    long *sp = stack;
    const unsigned char *pc = code;

#if defined(__GNUC__) && defined(__OPTIMIZE__)
    /* Threaded dispatch through a table of label addresses. */
    static void *const targets[] = { &&op_halt, &&op_push, &&op_add };
#define DISPATCH() goto *targets[*pc++]
    DISPATCH();
op_push:
    *++sp = *pc++;
    DISPATCH();
op_add:
    sp[-1] += sp[0];
    --sp;
    DISPATCH();
op_halt:
    return (int)*sp;
#else
    /* Portable dispatch with a switch. */
    for (;;) {
        switch (*pc++) {
        case OP_PUSH:
            *++sp = *pc++;
            break;
        case OP_ADD:
            sp[-1] += sp[0];
            --sp;
            break;
        default:
            return (int)*sp;
        }
    }
#endif
}

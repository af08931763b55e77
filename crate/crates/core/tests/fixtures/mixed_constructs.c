#include <stdio.h>
#define N 10

int square(int x) { return x * x; }

int unused(int a) { return a; }

int main() {
    int a[N], i = 0, total;
    total = 0;
    for (i = 0; i < N; i++) {
        if (i % 2 == 0) continue;
        a[i] = square(i);
        total += a[i];
    }
    do {
        total -= 3;
        if (total < 0) break;
    } while (total > 50);
    while (i--) ;
    printf("%d\n", total > 20 ? total : -total);
    return 0;
}

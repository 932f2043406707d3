/* Exports a function under the wrong name. */

int umat(void) { return 0; }

char *s = "a \" // still string"; // real

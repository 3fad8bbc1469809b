// first line
// second line
func f() {}

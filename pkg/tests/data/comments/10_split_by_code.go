// one
x := 1
// two

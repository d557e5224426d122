package files

import (
	"errors"
	"os"
	"path/filepath"
	"strings"
)

func Open(root, name string) (*os.File, error) {
	p := filepath.Join(root, filepath.Clean("/"+name))
	if !strings.HasPrefix(p, filepath.Clean(root)) {
		return nil, errors.New("path escapes root")
	}
	return os.Open(p)
}

func Walk(root string, visit func(string)) error {
	return filepath.Walk(root, func(path string, info os.FileInfo, err error) error {
		if err != nil {
			return err
		}
		visit(path)
		return nil
	})
}

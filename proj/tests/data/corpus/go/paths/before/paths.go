package files

import (
	"os"
	"path/filepath"
)

func Open(root, name string) (*os.File, error) {
	p := filepath.Join(root, name)
	return os.Open(p)
}

func Walk(root string, visit func(string)) error {
	return filepath.Walk(root, func(path string, info os.FileInfo, err error) error {
		if err != nil {
			return nil
		}
		visit(path)
		return nil
	})
}

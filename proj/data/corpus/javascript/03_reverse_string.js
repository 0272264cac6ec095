const reverse = (text) => text.split('').reverse().join('');
